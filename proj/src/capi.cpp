#include "pdmdirac/pdmdirac.h"

#include "pdmdirac/analytic.hpp"
#include "pdmdirac/errors.hpp"
#include "pdmdirac/runner.hpp"
#include "pdmdirac/transform.hpp"

#include <iostream>
#include <string>

using namespace pdmdirac;

struct pdd_model {
    ModelSpec spec;
    BuiltinModel kind;
    ParamMap params;
};

struct pdd_spectrum {
    SpectrumResult result;
};

namespace {

thread_local std::string g_last_error;

template <class F>
pdd_status guarded(F&& f) {
    try {
        g_last_error.clear();
        f();
        return PDD_OK;
    } catch (const Error& e) {
        g_last_error = e.what();
        return static_cast<pdd_status>(static_cast<int>(e.code()));
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return PDD_ERR_INTERNAL;
    } catch (...) {
        g_last_error = "unknown failure";
        return PDD_ERR_INTERNAL;
    }
}

BuiltinModel model_by_name(const char* name) {
    if (!name) throw Error(ErrorCode::InvalidParameter, "model name is null");
    const auto m = parse_builtin_model(name);
    if (!m) throw Error(ErrorCode::InvalidParameter, std::string("unknown model '") + name + "'");
    return *m;
}

ParamMap params_from(const char* const* keys, const double* values, size_t count) {
    ParamMap p;
    for (size_t i = 0; i < count; ++i) {
        if (!keys || !keys[i] || !values) throw Error(ErrorCode::InvalidParameter, "null parameter entry");
        p[keys[i]] = values[i];
    }
    return p;
}

void require(const void* p, const char* what) {
    if (!p) throw Error(ErrorCode::InvalidParameter, std::string(what) + " is null");
}

}  // namespace

extern "C" {

const char* pdd_last_error(void) { return g_last_error.c_str(); }

const char* pdd_status_name(pdd_status status) {
    if (status == PDD_OK) return "ok";
    if (status == PDD_ERR_INTERNAL) return "internal";
    if (status >= PDD_ERR_INVALID_PARAMETER && status <= PDD_ERR_IO) return to_string(static_cast<ErrorCode>(status));
    return "unknown";
}

pdd_status pdd_model_create(const char* name, const char* const* keys, const double* values, size_t count,
                            pdd_model** out) {
    return guarded([&] {
        require(out, "out");
        *out = nullptr;
        const BuiltinModel kind = model_by_name(name);
        ParamMap p = params_from(keys, values, count);
        *out = new pdd_model{builtin_model(kind, p), kind, p};
    });
}

void pdd_model_destroy(pdd_model* model) { delete model; }

pdd_status pdd_model_constant_u(const pdd_model* model, double tol, int* is_constant, double* A) {
    return guarded([&] {
        require(model, "model");
        require(is_constant, "is_constant");
        const auto a = detect_constant_u(model->spec, tol);
        *is_constant = a ? 1 : 0;
        if (A) *A = a.value_or(0.0);
    });
}

pdd_status pdd_solve(const pdd_model* model, const char* mode, size_t intervals, int states, pdd_spectrum** out) {
    return guarded([&] {
        require(model, "model");
        require(out, "out");
        *out = nullptr;
        if (intervals < 64) throw Error(ErrorCode::InvalidParameter, "intervals must be at least 64");
        if (states < 1) throw Error(ErrorCode::InvalidParameter, "states must be at least 1");
        RunConfig cfg;
        cfg.model = model->kind;
        cfg.params = model->params;
        cfg.mode = mode ? mode : "auto";
        cfg.grid_n = intervals;
        cfg.states = states;
        const PotentialMode pm = resolve_mode(cfg, model->spec);
        const TransformMap map = build_transform(model->spec.velocity(), model->spec.anchor(), cfg.quad_tol);
        auto* s = new pdd_spectrum{};
        try {
            if (pm == PotentialMode::ConstantU) {
                if (!std::isfinite(map.q_lo()) || !std::isfinite(map.q_hi()))
                    throw Error(ErrorCode::NonNormalizable, "free motion on the whole q-line has no discrete levels");
                const QGrid g = make_grid(map, intervals);
                s->result = solve_fixed(constant_u_potential(*detect_constant_u(model->spec, 1e-9), g, map), states);
            } else if (pm == PotentialMode::Approximate) {
                QGrid g;
                if (std::isfinite(map.q_lo()) && std::isfinite(map.q_hi())) {
                    g = make_grid(map, intervals);
                } else {
                    TruncationPolicy policy;
                    policy.base_intervals = intervals;
                    const ModelSpec& spec = model->spec;
                    g = truncate_domain(
                        map, [&](double q) { return approx_potential_at(spec, map.inverse(q)); }, states, policy);
                }
                s->result = solve_fixed(approx_potential(model->spec, g, map), states);
            } else {
                const QGrid g = make_grid(map, intervals);
                const SpectrumResult seed = solve_fixed(exact_potential(model->spec, 1.0, g, map), states);
                s->result.mode = pm;
                s->result.grid = g;
                for (int k = 0; k < states; ++k) {
                    const double e0 = std::sqrt(std::max(seed.pairs[static_cast<size_t>(k)].lambda, 1e-12));
                    SelfConsistentResult sc = solve_self_consistent(model->spec, map, g, k, e0, 1e-10, 100);
                    s->result.energies.push_back({sc.energy, -sc.energy});
                    s->result.iterations.push_back(sc.iterations);
                    s->result.pairs.push_back(std::move(sc.pair));
                }
            }
        } catch (...) {
            delete s;
            throw;
        }
        *out = s;
    });
}

size_t pdd_spectrum_size(const pdd_spectrum* spectrum) { return spectrum ? spectrum->result.pairs.size() : 0; }

pdd_status pdd_spectrum_state(const pdd_spectrum* spectrum, size_t k, double* lambda, double* e_plus, double* e_minus,
                              int* nodes, double* error_estimate) {
    return guarded([&] {
        require(spectrum, "spectrum");
        if (k >= spectrum->result.pairs.size()) throw Error(ErrorCode::InvalidParameter, "state index out of range");
        const EigenPair& p = spectrum->result.pairs[k];
        if (lambda) *lambda = p.lambda;
        if (e_plus) *e_plus = spectrum->result.energies[k].plus;
        if (e_minus) *e_minus = spectrum->result.energies[k].minus;
        if (nodes) *nodes = p.nodes;
        if (error_estimate) *error_estimate = p.error_estimate;
    });
}

void pdd_spectrum_destroy(pdd_spectrum* spectrum) { delete spectrum; }

pdd_status pdd_analytic_energy(const char* model, int n, const char* const* keys, const double* values, size_t count,
                               int as_published_s, double* e_plus, int* verified) {
    return guarded([&] {
        require(e_plus, "e_plus");
        const SpectrumValue v = spectrum_value(model_by_name(model), n, params_from(keys, values, count),
                                               as_published_s ? SVariant::AsPublished : SVariant::Verified);
        *e_plus = v.plus;
        if (verified) *verified = v.provenance == Provenance::Verified ? 1 : 0;
    });
}

double pdd_hermite(int n, double y) {
    double out = NAN;
    guarded([&] { out = hermite(n, y); });
    return out;
}

pdd_status pdd_hyp2f1_polynomial(int n, double b, double c, double z, double* out) {
    return guarded([&] {
        require(out, "out");
        *out = hyp2f1_polynomial(n, b, c, z);
    });
}

int pdd_runner_execute(const char* command, const char* config_path, const char* out_dir, int strict,
                       const char* mode, int states) {
    g_last_error.clear();
    if (!command || !config_path) {
        g_last_error = "command and config path are required";
        return kExitConfig;
    }
    RunRequest req;
    req.command = command;
    req.config_path = config_path;
    if (out_dir) req.out_dir = out_dir;
    req.strict = strict != 0;
    if (mode) req.mode = mode;
    if (states > 0) req.states = states;
    try {
        return run_command(req, std::cout, std::cerr);
    } catch (const std::exception& e) {
        g_last_error = e.what();
        std::cerr << "error [internal]: " << e.what() << "\n";
        return kExitNumerical;
    }
}

const char* pdd_config_help(void) {
    static const std::string text = config_keys_help();
    return text.c_str();
}

}  // extern "C"
