#include "pdmdirac/runner.hpp"

#include "pdmdirac/errors.hpp"
#include "pdmdirac/potential.hpp"
#include "pdmdirac/spinor.hpp"
#include "pdmdirac/transform.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <numbers>
#include <set>
#include <sstream>
#include <thread>

namespace pdmdirac {

namespace fs = std::filesystem;

namespace {

struct KeyDoc {
    const char* key;
    const char* doc;
};

const KeyDoc kKeys[] = {
    {"model.name", "CoshSquare | Rational | PoschlTeller | LinearSingular | ConstantRest (required)"},
    {"model.alpha", "profile scale alpha > 0"},
    {"model.v0", "velocity scale v0 > 0"},
    {"model.m0", "mass scale m0 >= 0"},
    {"model.A", "LinearSingular mass coefficient A >= 0"},
    {"model.c", "ConstantRest velocity c > 0"},
    {"model.x_shift", "PoschlTeller hole offset (default 0)"},
    {"mode", "auto | exact | approximate | constant-u (default auto)"},
    {"grid.n", "intervals across the q-box, >= 64 (default 2000)"},
    {"grid.truncation.initial_half_width", "initial |q| reach toward an infinite end (default 4)"},
    {"grid.truncation.delta", "required V(edge) - lambda_k margin (default 25)"},
    {"grid.truncation.max_expansions", "box expansions before giving up (default 12)"},
    {"grid.truncation.max_doublings", "box doublings before giving up (default 8)"},
    {"states", "number of states k (default 5)"},
    {"tol.quad", "quadrature tolerance of the q-map (default 1e-12)"},
    {"tol.eig", "eigenvalue settling tolerance for truncation (default 1e-8)"},
    {"tol.sc", "self-consistency tolerance on E (default 1e-10)"},
    {"tol.max_iter", "self-consistency iteration cap (default 100)"},
    {"compare.tol", "relative tolerance of the analytic comparison under --strict (default 1e-6)"},
    {"analytic.s_variant", "verified | as-published Poschl-Teller exponent (default verified)"},
    {"outputs", "comma list of spectrum, wavefunctions, potential, bic, discrepancy-report (default spectrum)"},
    {"bic.energies", "comma list of energies for the bic command"},
    {"scan.param", "model parameter swept by the scan command"},
    {"scan.min", "scan start"},
    {"scan.max", "scan end"},
    {"scan.steps", "scan points, >= 2"},
    {"output.dir", "artifact directory (default out)"},
    {"output.json", "true | false: mirror the spectrum as JSON (default false)"},
};

[[noreturn]] void config_error(const std::string& what) { throw Error(ErrorCode::Config, what); }

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

double to_double(const std::string& key, const std::string& value) {
    double out = 0.0;
    const char* first = value.data();
    const char* last = value.data() + value.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    if (ec != std::errc() || ptr != last) config_error("key '" + key + "': '" + value + "' is not a number");
    return out;
}

long to_int(const std::string& key, const std::string& value) {
    long out = 0;
    auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc() || ptr != value.data() + value.size())
        config_error("key '" + key + "': '" + value + "' is not an integer");
    return out;
}

std::vector<std::string> split_list(const std::string& value) {
    std::vector<std::string> out;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

std::string g17(double v) {
    if (std::isnan(v)) return "nan";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string fixed(double v, int prec = 10) {
    if (std::isnan(v)) return "-";
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.*f", prec, v);
    return buf;
}

std::string sci(double v) {
    if (std::isnan(v)) return "-";
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.3e", v);
    return buf;
}

void positive(const std::string& key, double v) {
    if (!(v > 0.0)) throw Error(ErrorCode::InvalidParameter, "key '" + key + "' must be positive");
}

// ---------------------------------------------------------------------------
// Solve pipeline

struct StateRow {
    int k = 0;
    double lambda = NAN;
    double e_plus = NAN;
    double e_minus = NAN;
    int nodes = 0;
    double error_estimate = NAN;
    int iterations = 0;
    std::optional<double> e_analytic;
    bool compared = false;
    std::string note;
};

struct Outcome {
    ModelSpec model;
    TransformMap map;
    PotentialMode mode;
    QGrid grid;
    bool threshold_only = false;
    std::vector<double> x;  // interior node positions
    SpectrumResult spectrum;
    std::vector<StateRow> rows;
    std::optional<PotentialField> field;  // approximate / constant-u field, or exact at the lowest E
};

ModelSpec make_model(const RunConfig& cfg) { return builtin_model(cfg.model, cfg.params); }

struct AnalyticRef {
    std::optional<double> value;
    bool compare = false;
    std::string note;
};

AnalyticRef analytic_for_state(const RunConfig& cfg, int k) {
    AnalyticRef r;
    try {
        switch (cfg.model) {
            case BuiltinModel::CoshSquare:
            case BuiltinModel::Rational:
                r.value = spectrum_value(cfg.model, k + 1, cfg.params).plus;
                r.compare = true;
                r.note = "n=" + std::to_string(k + 1);
                break;
            case BuiltinModel::PoschlTeller:
                if (k % 2 == 0) {
                    const SpectrumValue sv = spectrum_value(cfg.model, k / 2, cfg.params, cfg.s_variant);
                    r.value = sv.plus;
                    r.compare = true;
                    r.note = "n=" + std::to_string(k / 2) + " " + to_string(sv.provenance);
                } else {
                    r.note = "interleaved";
                }
                break;
            case BuiltinModel::LinearSingular:
                r.value = spectrum_value(cfg.model, k, cfg.params).plus;
                r.note = "n=" + std::to_string(k) + " as-published reference";
                break;
            case BuiltinModel::ConstantRest:
                if (k == 0) {
                    r.value = spectrum_value(cfg.model, 0, cfg.params).plus;
                    r.compare = true;
                    r.note = "threshold";
                }
                break;
        }
    } catch (const Error& e) {
        r.value.reset();
        r.compare = false;
        r.note = std::string("analytic ") + to_string(e.code());
    }
    return r;
}

QGrid choose_grid(const RunConfig& cfg, const TransformMap& map, const std::function<double(double)>& sampler) {
    if (std::isfinite(map.q_lo()) && std::isfinite(map.q_hi())) return make_grid(map, cfg.grid_n);
    TruncationPolicy policy = cfg.truncation;
    policy.base_intervals = cfg.grid_n;
    policy.eig_tol = cfg.eig_tol;
    return truncate_domain(map, sampler, cfg.states, policy);
}

Outcome run_solve(const RunConfig& cfg) {
    ModelSpec model = make_model(cfg);
    TransformMap map = build_transform(model.velocity(), model.anchor(), cfg.quad_tol);
    const PotentialMode mode = resolve_mode(cfg, model);
    Outcome out{model, map, mode, QGrid{}, false, {}, {}, {}, std::nullopt};
    const int K = cfg.states;

    if (mode == PotentialMode::ConstantU) {
        const double A = *detect_constant_u(model, 1e-9);
        if (!std::isfinite(map.q_lo()) || !std::isfinite(map.q_hi())) {
            // Free motion on the whole q-line: only the threshold E = +/- A is discrete.
            out.threshold_only = true;
            StateRow row;
            row.lambda = 0.0;
            const EnergyPair e = energies_from_lambda(0.0, A * A);
            row.e_plus = e.plus;
            row.e_minus = e.minus;
            row.error_estimate = 0.0;
            const AnalyticRef ref = analytic_for_state(cfg, 0);
            row.e_analytic = ref.value;
            row.compared = ref.compare;
            row.note = "continuum threshold";
            out.rows.push_back(row);
            out.spectrum.mode = mode;
            out.spectrum.offset = A * A;
            return out;
        }
        out.grid = make_grid(map, cfg.grid_n);
        out.field = constant_u_potential(A, out.grid, map);
        out.spectrum = solve_fixed(*out.field, K);
    } else if (mode == PotentialMode::Approximate) {
        auto shared_model = std::make_shared<const ModelSpec>(model);
        auto shared_map = std::make_shared<const TransformMap>(map);
        auto sampler = [shared_model, shared_map](double q) {
            return approx_potential_at(*shared_model, shared_map->inverse(q));
        };
        out.grid = choose_grid(cfg, map, sampler);
        out.field = approx_potential(model, out.grid, map);
        out.spectrum = solve_fixed(*out.field, K);
    } else {
        // Exact mode: initial energies from the approximate potential when it
        // exists, otherwise from the exact potential at E = 1.
        std::vector<double> e_init(static_cast<std::size_t>(K), 1.0);
        std::function<double(double)> sampler;
        auto shared_model = std::make_shared<const ModelSpec>(model);
        auto shared_map = std::make_shared<const TransformMap>(map);
        const bool massive = !model.mass().is_massless();
        if (massive) {
            sampler = [shared_model, shared_map](double q) {
                return approx_potential_at(*shared_model, shared_map->inverse(q));
            };
        } else {
            sampler = [shared_model, shared_map](double q) {
                return exact_potential_at(*shared_model, 1.0, shared_map->inverse(q));
            };
        }
        out.grid = choose_grid(cfg, map, sampler);
        const PotentialField seed =
            massive ? approx_potential(model, out.grid, map) : exact_potential(model, 1.0, out.grid, map);
        const SpectrumResult first = solve_fixed(seed, K);
        for (int k = 0; k < K; ++k) e_init[static_cast<std::size_t>(k)] = std::sqrt(std::max(first.pairs[k].lambda, 1e-12));
        out.spectrum.mode = mode;
        out.spectrum.grid = out.grid;
        for (int k = 0; k < K; ++k) {
            SelfConsistentResult sc =
                solve_self_consistent(model, map, out.grid, k, e_init[static_cast<std::size_t>(k)], cfg.sc_tol, cfg.max_iter);
            out.spectrum.energies.push_back({sc.energy, -sc.energy});
            out.spectrum.iterations.push_back(sc.iterations);
            out.spectrum.pairs.push_back(std::move(sc.pair));
        }
        out.field = exact_potential(model, out.spectrum.energies.front().plus, out.grid, map);
    }

    out.x = out.field->x;
    for (int k = 0; k < K; ++k) {
        const EigenPair& p = out.spectrum.pairs[static_cast<std::size_t>(k)];
        if (p.nodes != k) {
            std::ostringstream os;
            os << "Sturm check failed: state " << k << " has " << p.nodes << " nodes";
            throw Error(ErrorCode::InsufficientResolution, os.str());
        }
        StateRow row;
        row.k = k;
        row.lambda = p.lambda;
        row.e_plus = out.spectrum.energies[static_cast<std::size_t>(k)].plus;
        row.e_minus = out.spectrum.energies[static_cast<std::size_t>(k)].minus;
        row.nodes = p.nodes;
        row.error_estimate = p.error_estimate;
        row.iterations = out.spectrum.iterations[static_cast<std::size_t>(k)];
        const AnalyticRef ref = analytic_for_state(cfg, k);
        row.e_analytic = ref.value;
        row.compared = ref.compare;
        row.note = ref.note;
        out.rows.push_back(row);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Artifacts

struct Header {
    std::string artifact;
    std::string hash;
    std::string model;
    std::string mode;
    std::optional<QGrid> grid;
    std::vector<std::string> extra;
};

void write_header(std::ostream& os, const Header& h) {
    os << "# pdmdirac " << h.artifact << "\n";
    os << "# config_hash: " << h.hash << "\n";
    os << "# model: " << h.model << "\n";
    os << "# mode: " << h.mode << "\n";
    if (h.grid) {
        os << "# grid: q_begin=" << g17(h.grid->q_begin) << " q_end=" << g17(h.grid->q_end)
           << " intervals=" << h.grid->intervals << " lo_truncated=" << h.grid->lo_truncated
           << " hi_truncated=" << h.grid->hi_truncated << "\n";
    } else {
        os << "# grid: none\n";
    }
    for (const auto& line : h.extra) os << "# " << line << "\n";
}

std::ofstream open_out(const fs::path& path) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw Error(ErrorCode::Io, "cannot write " + path.string());
    return f;
}

Header header_for(const RunConfig& cfg, const Outcome& o, const std::string& artifact) {
    Header h;
    h.artifact = artifact;
    h.hash = config_hash(cfg);
    h.model = std::string(to_string(cfg.model));
    h.mode = to_string(o.mode);
    if (!o.threshold_only) h.grid = o.grid;
    return h;
}

void write_spectrum(const RunConfig& cfg, const Outcome& o, const fs::path& dir) {
    auto f = open_out(dir / "spectrum.csv");
    Header h = header_for(cfg, o, "spectrum");
    h.extra.push_back("offset: " + g17(o.spectrum.offset));
    write_header(f, h);
    f << "n,lambda,E_plus,E_minus,nodes,error_estimate\n";
    for (const auto& r : o.rows)
        f << r.k << "," << g17(r.lambda) << "," << g17(r.e_plus) << "," << g17(r.e_minus) << "," << r.nodes << ","
          << g17(r.error_estimate) << "\n";
    if (cfg.json) {
        nlohmann::ordered_json j;
        j["config_hash"] = h.hash;
        j["model"] = h.model;
        j["mode"] = h.mode;
        j["states"] = nlohmann::ordered_json::array();
        for (const auto& r : o.rows) {
            nlohmann::ordered_json s;
            s["n"] = r.k;
            s["lambda"] = r.lambda;
            s["E_plus"] = r.e_plus;
            s["E_minus"] = r.e_minus;
            s["nodes"] = r.nodes;
            s["error_estimate"] = r.error_estimate;
            s["iterations"] = r.iterations;
            if (r.e_analytic) s["E_analytic"] = *r.e_analytic;
            j["states"].push_back(s);
        }
        auto jf = open_out(dir / "spectrum.json");
        jf << j.dump(2) << "\n";
    }
}

void write_spinor_csv(std::ostream& f, const SpinorField& s, const ObservableSet& obs) {
    f << "x,q,re_psi1,im_psi1,re_psi2,im_psi2,rho,j\n";
    for (std::size_t i = 0; i < s.q.size(); ++i)
        f << g17(s.x[i]) << "," << g17(s.q[i]) << "," << g17(s.psi1[i].real()) << "," << g17(s.psi1[i].imag()) << ","
          << g17(s.psi2[i].real()) << "," << g17(s.psi2[i].imag()) << "," << g17(obs.rho[i]) << "," << g17(obs.j[i])
          << "\n";
}

void write_wavefunctions(const RunConfig& cfg, const Outcome& o, const fs::path& dir, std::ostream& out) {
    if (o.threshold_only) {
        out << "note: wavefunctions skipped, the threshold state is not normalizable\n";
        return;
    }
    for (const auto& r : o.rows) {
        const EigenPair& p = o.spectrum.pairs[static_cast<std::size_t>(r.k)];
        const SpinorField s = normalize(reconstruct(p, o.grid, o.x, o.model, r.e_plus), o.model);
        const ObservableSet obs = observables(s, o.model);
        auto f = open_out(dir / ("wavefunction_" + std::to_string(r.k) + ".csv"));
        Header h = header_for(cfg, o, "wavefunction");
        h.extra.push_back("state: " + std::to_string(r.k));
        h.extra.push_back("E: " + g17(r.e_plus));
        h.extra.push_back("norm_constant: " + g17(s.norm_constant));
        h.extra.push_back("dirac_residual: " + g17(dirac_residual(s, o.model, r.e_plus)));
        write_header(f, h);
        write_spinor_csv(f, s, obs);
    }
}

void write_potential(const RunConfig& cfg, const Outcome& o, const fs::path& dir) {
    if (!o.field) return;
    auto f = open_out(dir / "potential.csv");
    Header h = header_for(cfg, o, "potential");
    if (o.mode == PotentialMode::ExactAtEnergy) h.extra.push_back("energy: " + g17(o.field->energy));
    write_header(f, h);
    f << "q,V\n";
    for (std::size_t i = 0; i < o.field->q.size(); ++i) f << g17(o.field->q[i]) << "," << g17(o.field->values[i]) << "\n";
}

struct DiscrepancySummary {
    bool available = false;
    std::string claimed;
    double max_rel = 0.0;
    double max_abs = 0.0;
    std::optional<double> derived_max_rel;
    std::optional<double> min_rel_outer;  // min deviation over |q| >= 1
};

DiscrepancySummary write_discrepancy(const RunConfig& cfg, const fs::path& dir, std::ostream& out) {
    DiscrepancySummary sum;
    const ModelSpec model = make_model(cfg);
    if (model.mass().is_massless()) {
        out << "note: discrepancy report skipped, the approximate potential needs a non-zero mass\n";
        return sum;
    }
    const TransformMap map = build_transform(model.velocity(), model.anchor(), cfg.quad_tol);
    QGrid grid;
    ClaimedPotential claimed;
    std::optional<ClaimedPotential> derived;
    switch (cfg.model) {
        case BuiltinModel::PoschlTeller: {
            const double a = model.param("alpha"), v0 = model.param("v0");
            const double s = poschl_teller_s(cfg.params, cfg.s_variant);
            const double q0 = map.q_lo();
            claimed = [=](double q, double) {
                const double sn = std::sin(a * v0 * (q - q0));
                return a * a * v0 * v0 / 16.0 + a * a * v0 * v0 * s * (s - 1.0) / (sn * sn);
            };
            sum.claimed = std::string("alpha^2 v0^2/16 + alpha^2 v0^2 s(s-1)/sin^2, s ") +
                          (cfg.s_variant == SVariant::Verified ? "verified" : "as-published");
            grid = make_grid(map, cfg.grid_n);
            break;
        }
        case BuiltinModel::LinearSingular: {
            const double A = model.param("A"), v0 = model.param("v0");
            const double w = 2.0 * A * v0 * v0 * v0;
            claimed = [=](double q, double) { return 0.25 * w * w * q * q - v0 * v0 / 16.0; };
            derived = [=](double q, double) { return A * A * std::pow(v0, 4) * std::exp(2.0 * v0 * q) - v0 * v0 / 16.0; };
            sum.claimed = "omega^2 q^2/4 - v0^2/16, omega = 2 A v0^3";
            grid.q_begin = -4.0;
            grid.q_end = 4.0;
            grid.intervals = cfg.grid_n;
            grid.lo_truncated = grid.hi_truncated = true;
            break;
        }
        default: {
            const auto A = detect_constant_u(model, 1e-9);
            if (!A) {
                out << "note: no closed-form potential on record for this model\n";
                return sum;
            }
            const double a2 = *A * *A;
            claimed = [=](double, double) { return a2; };
            sum.claimed = "A^2";
            if (!std::isfinite(map.q_lo()) || !std::isfinite(map.q_hi())) {
                grid.q_begin = -4.0;
                grid.q_end = 4.0;
                grid.intervals = cfg.grid_n;
                grid.lo_truncated = grid.hi_truncated = true;
            } else {
                grid = make_grid(map, cfg.grid_n);
            }
        }
    }
    const DiscrepancyReport rep = potential_discrepancy_report(model, claimed, grid, map);
    sum.available = true;
    sum.max_rel = rep.max_rel;
    sum.max_abs = rep.max_abs;
    std::vector<double> derived_vals;
    if (derived) {
        double m = 0.0;
        for (std::size_t i = 0; i < rep.q.size(); ++i) {
            derived_vals.push_back((*derived)(rep.q[i], rep.x[i]));
            const double sc = std::max(std::abs(rep.computed[i]), std::abs(derived_vals.back()));
            if (sc > 0) m = std::max(m, std::abs(rep.computed[i] - derived_vals.back()) / sc);
        }
        sum.derived_max_rel = m;
    }
    double min_outer = INFINITY;
    for (std::size_t i = 0; i < rep.q.size(); ++i) {
        if (std::abs(rep.q[i]) < 1.0) continue;
        const double sc = std::max(std::abs(rep.computed[i]), std::abs(rep.claimed[i]));
        if (sc > 0) min_outer = std::min(min_outer, std::abs(rep.residual[i]) / sc);
    }
    if (std::isfinite(min_outer)) sum.min_rel_outer = min_outer;

    auto f = open_out(dir / "discrepancy.csv");
    Header h;
    h.artifact = "discrepancy-report";
    h.hash = config_hash(cfg);
    h.model = std::string(to_string(cfg.model));
    h.mode = "approximate";
    h.grid = grid;
    h.extra.push_back("claimed: " + sum.claimed);
    h.extra.push_back("max_rel: " + g17(sum.max_rel));
    if (sum.derived_max_rel) h.extra.push_back("derived: A^2 v0^4 exp(2 v0 q) - v0^2/16, max_rel " + g17(*sum.derived_max_rel));
    write_header(f, h);
    f << "q,x,computed,claimed,residual,rel" << (derived ? ",derived,derived_residual" : "") << "\n";
    for (std::size_t i = 0; i < rep.q.size(); ++i) {
        const double sc = std::max(std::abs(rep.computed[i]), std::abs(rep.claimed[i]));
        f << g17(rep.q[i]) << "," << g17(rep.x[i]) << "," << g17(rep.computed[i]) << "," << g17(rep.claimed[i]) << ","
          << g17(rep.residual[i]) << "," << g17(sc > 0 ? std::abs(rep.residual[i]) / sc : 0.0);
        if (derived) f << "," << g17(derived_vals[i]) << "," << g17(rep.computed[i] - derived_vals[i]);
        f << "\n";
    }
    return sum;
}

void print_discrepancy(const DiscrepancySummary& d, std::ostream& out) {
    if (!d.available) return;
    out << "potential discrepancy vs " << d.claimed << ": max rel " << sci(d.max_rel) << "\n";
    if (d.derived_max_rel) out << "  vs derived exponential form: max rel " << sci(*d.derived_max_rel) << "\n";
    if (d.derived_max_rel && d.min_rel_outer) out << "  smallest deviation for |q| >= 1: " << sci(*d.min_rel_outer) << "\n";
}

bool print_summary(const RunConfig& cfg, const Outcome& o, std::ostream& out) {
    out << "model " << to_string(cfg.model) << ", mode " << to_string(o.mode) << ", config " << config_hash(cfg) << "\n";
    char line[256];
    std::snprintf(line, sizeof line, "%3s  %20s  %20s  %10s  %5s  %5s  %s\n", "n", "E_numeric", "E_analytic", "rel_diff",
                  "nodes", "iter", "note");
    out << line;
    bool ok = true;
    for (const auto& r : o.rows) {
        double rel = NAN;
        if (r.e_analytic) rel = std::abs(r.e_plus - *r.e_analytic) / std::abs(*r.e_analytic);
        std::string note = r.note;
        if (r.compared && !(rel <= cfg.compare_tol)) {
            ok = false;
            note += " MISMATCH";
        }
        std::snprintf(line, sizeof line, "%3d  %20s  %20s  %10s  %5d  %5d  %s\n", r.k, fixed(r.e_plus, 12).c_str(),
                      r.e_analytic ? fixed(*r.e_analytic, 12).c_str() : "-", sci(rel).c_str(), r.nodes, r.iterations,
                      note.c_str());
        out << line;
    }
    if (cfg.model == BuiltinModel::PoschlTeller) {
        try {
            const auto ladder = poschl_teller_ladder(cfg.params, cfg.states, cfg.s_variant);
            out << "single-hole (s+k) ladder:";
            for (double e : ladder) out << " " << fixed(e, 8);
            out << "\n";
            int interleaved = 0;
            for (const auto& r : o.rows) interleaved += r.k % 2;
            out << "levels between the published (s+2n) values: " << interleaved << "\n";
        } catch (const Error&) {
        }
    }
    return ok;
}

int cmd_solve(const RunConfig& cfg, bool strict, std::ostream& out) {
    const fs::path dir(cfg.output_dir);
    fs::create_directories(dir);
    // The discrepancy report does not depend on the solve, so it is written
    // even when the spectrum cannot be computed.
    if (cfg.wants("discrepancy-report")) print_discrepancy(write_discrepancy(cfg, dir, out), out);
    const Outcome o = run_solve(cfg);
    if (cfg.wants("spectrum")) write_spectrum(cfg, o, dir);
    if (cfg.wants("wavefunctions")) write_wavefunctions(cfg, o, dir, out);
    if (cfg.wants("potential")) write_potential(cfg, o, dir);
    const bool ok = print_summary(cfg, o, out);
    if (cfg.wants("bic")) {
        for (std::size_t i = 0; i < cfg.bic_energies.size(); ++i) {
            const SpinorField s = bic_family(o.model, cfg.bic_energies[i], cfg.grid_n, cfg.quad_tol);
            auto f = open_out(dir / ("bic_" + std::to_string(i) + ".csv"));
            Header h = header_for(cfg, o, "bic");
            h.grid = s.grid;
            h.mode = "constant-u";
            h.extra.push_back("E: " + g17(s.E));
            h.extra.push_back("norm_constant: " + g17(s.norm_constant));
            write_header(f, h);
            write_spinor_csv(f, s, observables(s, o.model));
        }
    }
    if (strict && !ok) {
        out << "strict: analytic comparison failed beyond compare.tol = " << g17(cfg.compare_tol) << "\n";
        return kExitComparison;
    }
    return kExitOk;
}

int cmd_bic(const RunConfig& cfg, std::ostream& out) {
    if (cfg.bic_energies.empty()) config_error("the bic command needs bic.energies");
    const fs::path dir(cfg.output_dir);
    fs::create_directories(dir);
    const ModelSpec model = make_model(cfg);
    out << "model " << to_string(cfg.model) << ", unquantized constant-u states, config " << config_hash(cfg) << "\n";
    char line[256];
    std::snprintf(line, sizeof line, "%3s  %16s  %16s  %20s  %20s  %10s\n", "i", "E", "k", "total_prob", "norm_constant",
                  "max|j|");
    out << line;
    for (std::size_t i = 0; i < cfg.bic_energies.size(); ++i) {
        const double E = cfg.bic_energies[i];
        const SpinorField s = bic_family(model, E, cfg.grid_n, cfg.quad_tol);
        const ObservableSet obs = observables(s, model);
        double jmax = 0.0;
        for (double j : obs.j) jmax = std::max(jmax, std::abs(j));
        const double A = *detect_constant_u(model, 1e-9);
        const double k = std::sqrt(std::max(0.0, E * E - A * A));
        std::snprintf(line, sizeof line, "%3zu  %16s  %16s  %20s  %20s  %10s\n", i, fixed(E, 10).c_str(),
                      fixed(k, 10).c_str(), fixed(1.0 / (s.norm_constant * s.norm_constant), 12).c_str(),
                      fixed(s.norm_constant, 12).c_str(), sci(jmax).c_str());
        out << line;
        auto f = open_out(dir / ("bic_" + std::to_string(i) + ".csv"));
        Header h;
        h.artifact = "bic";
        h.hash = config_hash(cfg);
        h.model = std::string(to_string(cfg.model));
        h.mode = "constant-u";
        h.grid = s.grid;
        h.extra.push_back("E: " + g17(E));
        h.extra.push_back("norm_constant: " + g17(s.norm_constant));
        if (cfg.model == BuiltinModel::CoshSquare && k > 0)
            h.extra.push_back("printed_norm_constant: " + g17(published_coshsquare_normalization(cfg.params, E)));
        write_header(f, h);
        write_spinor_csv(f, s, obs);
    }
    return kExitOk;
}

int cmd_report(const RunConfig& cfg, std::ostream& out) {
    const fs::path dir(cfg.output_dir);
    fs::create_directories(dir);
    const std::string hash = config_hash(cfg);

    // Closed forms with provenance.
    {
        auto f = open_out(dir / "analytic.csv");
        Header h;
        h.artifact = "analytic";
        h.hash = hash;
        h.model = std::string(to_string(cfg.model));
        h.mode = "closed-form";
        write_header(f, h);
        f << "n,E_plus,E_minus,provenance,formula\n";
        const int first = (cfg.model == BuiltinModel::CoshSquare || cfg.model == BuiltinModel::Rational) ? 1 : 0;
        const int last = cfg.model == BuiltinModel::ConstantRest ? 0 : first + cfg.states - 1;
        std::vector<SVariant> variants{SVariant::Verified};
        if (cfg.model == BuiltinModel::PoschlTeller) variants.push_back(SVariant::AsPublished);
        for (SVariant var : variants) {
            for (int n = first; n <= last; ++n) {
                try {
                    const SpectrumValue sv = spectrum_value(cfg.model, n, cfg.params, var);
                    f << n << "," << g17(sv.plus) << "," << g17(sv.minus) << "," << to_string(sv.provenance) << ",\""
                      << sv.formula << "\"\n";
                } catch (const Error& e) {
                    f << n << ",nan,nan," << (var == SVariant::Verified ? "verified" : "as-published") << ",\""
                      << to_string(e.code()) << "\"\n";
                }
            }
        }
    }

    print_discrepancy(write_discrepancy(cfg, dir, out), out);

    // Grid convergence of the eigenvalues over h, h/2, h/4.
    std::optional<Outcome> solved;
    try {
        solved.emplace(run_solve(cfg));
    } catch (const Error& e) {
        out << "solve failed [" << to_string(e.code()) << "]: " << e.what() << "\n";
        return exit_status_for(e.code());
    }
    const Outcome& o = *solved;
    print_summary(cfg, o, out);
    if (!o.threshold_only && o.field && o.mode != PotentialMode::ExactAtEnergy) {
        const QGrid g2 = o.grid.refined();
        PotentialField f2;
        if (o.mode == PotentialMode::ConstantU) f2 = constant_u_potential(o.field->constant_u, g2, o.map);
        else f2 = approx_potential(o.model, g2, o.map);
        const SpectrumResult r2 = solve_fixed(f2, cfg.states);
        auto f = open_out(dir / "convergence.csv");
        write_header(f, header_for(cfg, o, "convergence"));
        f << "n,lambda_h,lambda_h2,lambda_h4,ratio,error_estimate\n";
        out << "grid convergence |l(h)-l(h/2)| / |l(h/2)-l(h/4)|:";
        for (int k = 0; k < cfg.states; ++k) {
            const EigenPair& a = o.spectrum.pairs[static_cast<std::size_t>(k)];
            const EigenPair& b = r2.pairs[static_cast<std::size_t>(k)];
            const double d1 = std::abs(a.lambda_coarse - a.lambda_fine);
            const double d2 = std::abs(b.lambda_coarse - b.lambda_fine);
            const double ratio = d2 > 0 ? d1 / d2 : NAN;
            f << k << "," << g17(a.lambda_coarse) << "," << g17(a.lambda_fine) << "," << g17(b.lambda_fine) << ","
              << g17(ratio) << "," << g17(a.error_estimate) << "\n";
            out << " " << fixed(ratio, 3);
        }
        out << "\n";
    }
    return kExitOk;
}

// ---------------------------------------------------------------------------
// Scan

std::vector<std::string> scan_point(const RunConfig& base, int point, double value) {
    RunConfig cfg = base;
    cfg.params[cfg.scan_param] = value;
    std::vector<std::string> lines;
    try {
        const Outcome o = run_solve(cfg);
        for (const auto& r : o.rows) {
            std::ostringstream os;
            os << point << "," << g17(value) << "," << r.k << "," << g17(r.e_plus) << ","
               << (r.e_analytic ? g17(*r.e_analytic) : std::string("nan")) << ",ok\n";
            lines.push_back(os.str());
        }
    } catch (const Error& e) {
        lines.clear();
        for (int k = 0; k < cfg.states; ++k) {
            std::ostringstream os;
            os << point << "," << g17(value) << "," << k << ",nan,nan," << to_string(e.code()) << "\n";
            lines.push_back(os.str());
        }
    }
    // Constant-u threshold runs emit a single row; pad so every point has the same row count.
    while (static_cast<int>(lines.size()) < cfg.states) {
        std::ostringstream os;
        os << point << "," << g17(value) << "," << lines.size() << ",nan,nan,absent\n";
        lines.push_back(os.str());
    }
    return lines;
}

int cmd_scan(const RunConfig& cfg, std::ostream& out) {
    if (cfg.scan_param.empty()) config_error("the scan command needs scan.param");
    if (cfg.scan_steps < 2) throw Error(ErrorCode::InvalidParameter, "scan.steps must be at least 2");
    {
        // Validate the axis against the model's parameter set.
        ParamMap probe = cfg.params;
        probe[cfg.scan_param] = cfg.scan_min;
        (void)builtin_model(cfg.model, probe);
        probe[cfg.scan_param] = cfg.scan_max;
        (void)builtin_model(cfg.model, probe);
    }
    const fs::path dir(cfg.output_dir);
    fs::create_directories(dir);
    const fs::path path = dir / "scan.csv";
    const std::string hash = config_hash(cfg);

    std::vector<std::string> header_lines;
    {
        std::ostringstream hs;
        Header h;
        h.artifact = "scan";
        h.hash = hash;
        h.model = std::string(to_string(cfg.model));
        h.mode = cfg.mode;
        h.extra.push_back("axis: " + cfg.scan_param + " " + g17(cfg.scan_min) + " " + g17(cfg.scan_max) + " " +
                          std::to_string(cfg.scan_steps));
        write_header(hs, h);
        hs << "point,param,n,E_numeric,E_analytic,status\n";
        std::string line;
        std::istringstream is(hs.str());
        while (std::getline(is, line)) header_lines.push_back(line + "\n");
    }

    // Resume: keep complete points of a previous run with the same config.
    std::vector<std::string> kept;
    int done = 0;
    if (fs::exists(path)) {
        std::ifstream in(path, std::ios::binary);
        std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        std::vector<std::string> lines;
        std::size_t pos = 0;
        while (pos < content.size()) {
            const auto nl = content.find('\n', pos);
            if (nl == std::string::npos) break;  // torn last line
            lines.push_back(content.substr(pos, nl - pos + 1));
            pos = nl + 1;
        }
        const bool same = lines.size() >= header_lines.size() &&
                          std::equal(header_lines.begin(), header_lines.end(), lines.begin());
        if (same) {
            std::map<int, std::vector<std::string>> by_point;
            for (std::size_t i = header_lines.size(); i < lines.size(); ++i) {
                const int p = std::atoi(lines[i].c_str());
                by_point[p].push_back(lines[i]);
            }
            for (int p = 0;; ++p) {
                auto it = by_point.find(p);
                if (it == by_point.end() || static_cast<int>(it->second.size()) != cfg.states) break;
                kept.insert(kept.end(), it->second.begin(), it->second.end());
                done = p + 1;
            }
        }
    }
    {
        auto f = open_out(path);
        for (const auto& l : header_lines) f << l;
        for (const auto& l : kept) f << l;
    }
    if (done > 0) out << "resuming scan after " << done << " completed points\n";

    std::ofstream f(path, std::ios::binary | std::ios::app);
    if (!f) throw Error(ErrorCode::Io, "cannot append to " + path.string());
    const unsigned workers = std::max(1u, std::min(8u, std::thread::hardware_concurrency()));
    int failures = 0;
    for (int start = done; start < cfg.scan_steps; start += static_cast<int>(workers)) {
        const int end = std::min(cfg.scan_steps, start + static_cast<int>(workers));
        std::vector<std::future<std::vector<std::string>>> jobs;
        for (int p = start; p < end; ++p) {
            const double t = static_cast<double>(p) / (cfg.scan_steps - 1);
            const double value = p == cfg.scan_steps - 1 ? cfg.scan_max : cfg.scan_min + t * (cfg.scan_max - cfg.scan_min);
            jobs.push_back(std::async(std::launch::async, scan_point, std::cref(cfg), p, value));
        }
        for (auto& j : jobs) {
            for (const auto& line : j.get()) {
                if (line.find(",ok\n") == std::string::npos && line.find(",absent\n") == std::string::npos) ++failures;
                f << line;
            }
            f.flush();
        }
    }
    out << "scan of " << cfg.scan_param << " over " << cfg.scan_steps << " points written to " << path.string();
    if (failures > 0) out << " (" << failures << " failed rows)";
    out << "\n";
    return kExitOk;
}

}  // namespace

bool RunConfig::wants(std::string_view artifact) const {
    return std::find(outputs.begin(), outputs.end(), artifact) != outputs.end();
}

std::string config_keys_help() {
    std::ostringstream os;
    for (const auto& k : kKeys) {
        char line[200];
        std::snprintf(line, sizeof line, "  %-38s %s\n", k.key, k.doc);
        os << line;
    }
    return os.str();
}

RunConfig parse_config(std::string_view text, const std::map<std::string, std::string>& overrides) {
    std::map<std::string, std::string> entries;
    std::size_t lineno = 0;
    std::istringstream is{std::string(text)};
    std::string raw;
    while (std::getline(is, raw)) {
        ++lineno;
        const auto hash = raw.find('#');
        const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            config_error("line " + std::to_string(lineno) + ": expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) config_error("line " + std::to_string(lineno) + ": empty key");
        entries[key] = value;
    }
    for (const auto& [k, v] : overrides) entries[k] = v;

    RunConfig cfg;
    for (const auto& [key, value] : entries) {
        const bool known = std::any_of(std::begin(kKeys), std::end(kKeys), [&](const KeyDoc& d) { return key == d.key; });
        if (!known) config_error("unknown config key '" + key + "'");
        if (value.empty()) config_error("key '" + key + "' has no value");
    }
    auto it = entries.find("model.name");
    if (it == entries.end()) config_error("missing required key 'model.name'");
    const auto model = parse_builtin_model(it->second);
    if (!model) config_error("unknown model '" + it->second + "'");
    cfg.model = *model;

    for (const auto& [key, value] : entries) {
        if (key.rfind("model.", 0) == 0 && key != "model.name") cfg.params[key.substr(6)] = to_double(key, value);
        else if (key == "mode") {
            if (value != "auto" && value != "exact" && value != "approximate" && value != "constant-u")
                config_error("mode must be auto, exact, approximate or constant-u");
            cfg.mode = value;
        } else if (key == "grid.n") {
            const long n = to_int(key, value);
            if (n < 64) throw Error(ErrorCode::InvalidParameter, "grid.n must be at least 64");
            cfg.grid_n = static_cast<std::size_t>(n);
        } else if (key == "grid.truncation.initial_half_width") {
            cfg.truncation.initial_half_width = to_double(key, value);
            positive(key, cfg.truncation.initial_half_width);
        } else if (key == "grid.truncation.delta") {
            cfg.truncation.delta = to_double(key, value);
            positive(key, cfg.truncation.delta);
        } else if (key == "grid.truncation.max_expansions") {
            cfg.truncation.max_expansions = static_cast<int>(to_int(key, value));
        } else if (key == "grid.truncation.max_doublings") {
            cfg.truncation.max_doublings = static_cast<int>(to_int(key, value));
        } else if (key == "states") {
            cfg.states = static_cast<int>(to_int(key, value));
            if (cfg.states < 1) throw Error(ErrorCode::InvalidParameter, "states must be at least 1");
        } else if (key == "tol.quad") {
            cfg.quad_tol = to_double(key, value);
            positive(key, cfg.quad_tol);
        } else if (key == "tol.eig") {
            cfg.eig_tol = to_double(key, value);
            positive(key, cfg.eig_tol);
        } else if (key == "tol.sc") {
            cfg.sc_tol = to_double(key, value);
            positive(key, cfg.sc_tol);
        } else if (key == "tol.max_iter") {
            cfg.max_iter = static_cast<int>(to_int(key, value));
            if (cfg.max_iter < 1) throw Error(ErrorCode::InvalidParameter, "tol.max_iter must be at least 1");
        } else if (key == "compare.tol") {
            cfg.compare_tol = to_double(key, value);
            positive(key, cfg.compare_tol);
        } else if (key == "analytic.s_variant") {
            if (value == "verified") cfg.s_variant = SVariant::Verified;
            else if (value == "as-published") cfg.s_variant = SVariant::AsPublished;
            else config_error("analytic.s_variant must be verified or as-published");
        } else if (key == "outputs") {
            cfg.outputs = split_list(value);
            for (const auto& o : cfg.outputs) {
                if (o != "spectrum" && o != "wavefunctions" && o != "potential" && o != "bic" && o != "discrepancy-report")
                    config_error("unknown output '" + o + "'");
            }
        } else if (key == "bic.energies") {
            for (const auto& e : split_list(value)) cfg.bic_energies.push_back(to_double(key, e));
        } else if (key == "scan.param") {
            cfg.scan_param = value.rfind("model.", 0) == 0 ? value.substr(6) : value;
        } else if (key == "scan.min") {
            cfg.scan_min = to_double(key, value);
        } else if (key == "scan.max") {
            cfg.scan_max = to_double(key, value);
        } else if (key == "scan.steps") {
            cfg.scan_steps = static_cast<int>(to_int(key, value));
        } else if (key == "output.dir") {
            cfg.output_dir = value;
        } else if (key == "output.json") {
            if (value != "true" && value != "false") config_error("output.json must be true or false");
            cfg.json = value == "true";
        }
    }
    // Validates parameters (names the missing key).
    (void)builtin_model(cfg.model, cfg.params);
    cfg.entries = std::move(entries);
    return cfg;
}

RunConfig load_config(const std::string& path, const std::map<std::string, std::string>& overrides) {
    std::ifstream in(path, std::ios::binary);
    if (!in) config_error("cannot read config file '" + path + "'");
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_config(text, overrides);
}

std::string config_hash(const RunConfig& config) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto feed = [&](std::string_view s) {
        for (unsigned char c : s) {
            h ^= c;
            h *= 0x100000001b3ULL;
        }
    };
    for (const auto& [k, v] : config.entries) {
        if (k == "output.dir") continue;
        feed(k);
        feed("=");
        feed(v);
        feed("\n");
    }
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

PotentialMode resolve_mode(const RunConfig& config, const ModelSpec& model) {
    if (config.mode == "exact") return PotentialMode::ExactAtEnergy;
    if (config.mode == "approximate") return PotentialMode::Approximate;
    if (config.mode == "constant-u") {
        if (!detect_constant_u(model, 1e-9))
            throw Error(ErrorCode::InvalidParameter, "mode constant-u requested but m v^2 is not constant");
        return PotentialMode::ConstantU;
    }
    if (detect_constant_u(model, 1e-9)) return PotentialMode::ConstantU;
    if (!model.mass().is_massless()) return PotentialMode::Approximate;
    return PotentialMode::ExactAtEnergy;
}

int exit_status_for(ErrorCode code) {
    switch (code) {
        case ErrorCode::Config:
        case ErrorCode::InvalidParameter: return kExitConfig;
        default: return kExitNumerical;
    }
}

int run_command(const RunRequest& request, std::ostream& out, std::ostream& err) {
    try {
        std::map<std::string, std::string> overrides;
        if (request.mode) overrides["mode"] = *request.mode;
        if (request.states) overrides["states"] = std::to_string(*request.states);
        RunConfig cfg = load_config(request.config_path, overrides);
        if (request.out_dir) cfg.output_dir = *request.out_dir;
        if (request.command == "solve") return cmd_solve(cfg, request.strict, out);
        if (request.command == "scan") return cmd_scan(cfg, out);
        if (request.command == "bic") return cmd_bic(cfg, out);
        if (request.command == "report") return cmd_report(cfg, out);
        err << "error: unknown command '" << request.command << "'\n";
        return kExitConfig;
    } catch (const NonConvergenceError& e) {
        err << "error [" << to_string(e.code()) << "]: " << e.what() << "\n";
        err << "  history:";
        for (double h : e.history()) err << " " << g17(h);
        err << "\n";
        return exit_status_for(e.code());
    } catch (const Error& e) {
        err << "error [" << to_string(e.code()) << "]: " << e.what() << "\n";
        return exit_status_for(e.code());
    } catch (const fs::filesystem_error& e) {
        err << "error [io]: " << e.what() << "\n";
        return kExitNumerical;
    }
}

}  // namespace pdmdirac
