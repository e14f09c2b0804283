#include "pdmdirac/eigensolver.hpp"

#include "pdmdirac/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

namespace pdmdirac {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

// Number of eigenvalues strictly below x.
std::size_t sturm_count(std::span<const double> d, double e2, double pivmin, double x) {
    std::size_t count = 0;
    double q = d[0] - x;
    if (std::abs(q) < pivmin) q = -pivmin;
    if (q < 0) ++count;
    for (std::size_t i = 1; i < d.size(); ++i) {
        q = d[i] - x - e2 / q;
        if (std::abs(q) < pivmin) q = -pivmin;
        if (q < 0) ++count;
    }
    return count;
}

void fix_sign(std::vector<double>& v) {
    double vmax = 0.0;
    for (double a : v) vmax = std::max(vmax, std::abs(a));
    for (double a : v) {
        if (std::abs(a) > 1e-6 * vmax) {
            if (a < 0) for (double& b : v) b = -b;
            return;
        }
    }
}

std::vector<double> diagonal_for(const QGrid& grid, std::span<const double> values, double shift) {
    const double h = grid.h();
    std::vector<double> d(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) d[i] = 2.0 / (h * h) + values[i] - shift;
    return d;
}

std::vector<double> sample_values(const QGrid& grid, const std::function<double(double)>& sampler) {
    std::vector<double> v(grid.interior());
    for (std::size_t i = 0; i < v.size(); ++i) {
        v[i] = sampler(grid.node(i + 1));
        if (!std::isfinite(v[i])) {
            std::ostringstream os;
            os << "potential is not finite at q=" << grid.node(i + 1);
            throw Error(ErrorCode::SingularNode, os.str());
        }
    }
    return v;
}

}  // namespace

std::vector<double> tridiagonal_lowest(std::span<const double> diag, double offdiag, std::size_t count) {
    const std::size_t n = diag.size();
    if (count > n) throw Error(ErrorCode::InsufficientResolution, "more eigenvalues requested than unknowns");
    const double e2 = offdiag * offdiag;
    double lo = INFINITY, hi = -INFINITY;
    for (double d : diag) {
        lo = std::min(lo, d - 2 * std::abs(offdiag));
        hi = std::max(hi, d + 2 * std::abs(offdiag));
    }
    const double norm = std::max(std::abs(lo), std::abs(hi));
    const double pivmin = std::max(std::numeric_limits<double>::min(), kEps * kEps * std::max(e2, 1.0));
    std::vector<double> out;
    out.reserve(count);
    double floor = lo;
    for (std::size_t k = 0; k < count; ++k) {
        double a = floor, b = hi;
        for (int it = 0; it < 256; ++it) {
            const double mid = 0.5 * (a + b);
            if (sturm_count(diag, e2, pivmin, mid) >= k + 1) b = mid;
            else a = mid;
            if (b - a <= 2 * kEps * std::max(std::abs(a), std::abs(b)) + kEps * kEps * norm) break;
        }
        const double lambda = 0.5 * (a + b);
        out.push_back(lambda);
        floor = a;
    }
    return out;
}

std::vector<double> tridiagonal_eigenvector(std::span<const double> diag, double offdiag, double lambda) {
    const std::size_t n = diag.size();
    double norm = std::abs(offdiag) * 2;
    for (double d : diag) norm = std::max(norm, std::abs(d) + 2 * std::abs(offdiag));
    const double tiny = kEps * norm;

    // Deterministic start vector with components along every eigenvector.
    std::mt19937_64 gen(0x5eed1234abcdULL);
    std::vector<double> y(n);
    for (double& v : y) v = static_cast<double>(gen() >> 11) * 0x1.0p-53 - 0.5;

    std::vector<double> cp(n), dp(n), prev;
    for (int it = 0; it < 6; ++it) {
        // Thomas solve of (T - lambda I) z = y.
        double w = diag[0] - lambda;
        if (std::abs(w) < tiny) w = tiny;
        cp[0] = offdiag / w;
        dp[0] = y[0] / w;
        for (std::size_t i = 1; i < n; ++i) {
            w = diag[i] - lambda - offdiag * cp[i - 1];
            if (std::abs(w) < tiny) w = tiny;
            cp[i] = offdiag / w;
            dp[i] = (y[i] - offdiag * dp[i - 1]) / w;
        }
        y[n - 1] = dp[n - 1];
        for (std::size_t i = n - 1; i-- > 0;) y[i] = dp[i] - cp[i] * y[i + 1];
        const double s = std::sqrt(std::inner_product(y.begin(), y.end(), y.begin(), 0.0));
        for (double& v : y) v /= s;
        fix_sign(y);
        if (!prev.empty()) {
            double diff = 0.0;
            for (std::size_t i = 0; i < n; ++i) diff = std::max(diff, std::abs(y[i] - prev[i]));
            if (diff < 1e-14) break;
        }
        prev = y;
    }
    return y;
}

int count_nodes(std::span<const double> phi) {
    double vmax = 0.0;
    for (double a : phi) vmax = std::max(vmax, std::abs(a));
    const double thresh = 1e-10 * vmax;
    int nodes = 0;
    int last_sign = 0;
    for (double a : phi) {
        if (std::abs(a) <= thresh) continue;
        const int s = a > 0 ? 1 : -1;
        if (last_sign != 0 && s != last_sign) ++nodes;
        last_sign = s;
    }
    return nodes;
}

EnergyPair energies_from_lambda(double lambda, double offset) {
    const double r = lambda + offset;
    if (!(r >= 0.0)) {
        std::ostringstream os;
        os << "lambda + offset = " << r << " < 0: the energy would be imaginary";
        throw Error(ErrorCode::ImaginaryEnergy, os.str());
    }
    const double e = std::sqrt(r);
    return {e, -e};
}

SpectrumResult solve_fixed(const PotentialField& potential, int k_states, const SolveOptions& options) {
    if (k_states < 1) throw Error(ErrorCode::InvalidParameter, "k_states must be at least 1");
    if (potential.any_singular())
        throw Error(ErrorCode::SingularNode, "potential has singular interior nodes; restrict the grid or energy");
    const QGrid& grid = potential.grid;
    const std::size_t k = static_cast<std::size_t>(k_states);
    if (k > potential.values.size()) {
        std::ostringstream os;
        os << k_states << " states requested but the grid has only " << potential.values.size() << " unknowns";
        throw Error(ErrorCode::InsufficientResolution, os.str());
    }

    SpectrumResult result;
    result.mode = potential.mode;
    result.grid = grid;
    result.offset = potential.mode == PotentialMode::ConstantU ? potential.constant_u * potential.constant_u : 0.0;
    const double shift = result.offset;
    const double h = grid.h();
    const double off = -1.0 / (h * h);

    const std::vector<double> diag = diagonal_for(grid, potential.values, shift);
    const std::vector<double> lambda_here = tridiagonal_lowest(diag, off, k);

    const double vmin = *std::min_element(potential.values.begin(), potential.values.end()) - shift;
    if ((lambda_here.back() - vmin) * h * h > 1.0) {
        std::ostringstream os;
        os << "state " << k_states - 1 << " is not resolved: fewer than ~6 nodes per wavelength at h=" << h;
        throw Error(ErrorCode::InsufficientResolution, os.str());
    }

    std::vector<double> lambda_coarse = lambda_here, lambda_fine = lambda_here;
    if (options.richardson) {
        if (potential.sampler) {
            const QGrid fine = grid.refined();
            const std::vector<double> vf = sample_values(fine, potential.sampler);
            const double hf = fine.h();
            lambda_fine = tridiagonal_lowest(diagonal_for(fine, vf, shift), -1.0 / (hf * hf), k);
        } else {
            if (grid.intervals % 2 != 0 || grid.intervals < 4)
                throw Error(ErrorCode::InsufficientResolution,
                            "refinement without a sampler needs an even number of intervals");
            QGrid coarse = grid;
            coarse.intervals /= 2;
            std::vector<double> vc(coarse.interior());
            for (std::size_t i = 0; i < vc.size(); ++i) vc[i] = potential.values[2 * i + 1];
            const double hc = coarse.h();
            if (k > vc.size()) throw Error(ErrorCode::InsufficientResolution, "coarse grid too small for refinement");
            lambda_coarse = tridiagonal_lowest(diagonal_for(coarse, vc, shift), -1.0 / (hc * hc), k);
        }
    }

    for (std::size_t j = 0; j < k; ++j) {
        EigenPair p;
        p.lambda_coarse = lambda_coarse[j];
        p.lambda_fine = lambda_fine[j];
        if (options.richardson) {
            p.lambda = (4.0 * lambda_fine[j] - lambda_coarse[j]) / 3.0;
            p.error_estimate = std::abs(lambda_coarse[j] - lambda_fine[j]) / 3.0;
        } else {
            p.lambda = lambda_here[j];
        }
        p.grid_h = h;
        const std::vector<double> y = tridiagonal_eigenvector(diag, off, lambda_here[j]);
        p.phi.assign(grid.intervals + 1, 0.0);
        const double scale = 1.0 / std::sqrt(h);
        for (std::size_t i = 0; i < y.size(); ++i) p.phi[i + 1] = y[i] * scale;
        p.nodes = count_nodes(p.phi);
        result.energies.push_back(energies_from_lambda(p.lambda, result.offset));
        result.pairs.push_back(std::move(p));
        result.iterations.push_back(0);
    }
    return result;
}

SelfConsistentResult solve_self_consistent(const ModelSpec& model, const TransformMap& map, const QGrid& grid,
                                           int state_index, double E_init, double tol, int max_iter) {
    if (state_index < 0) throw Error(ErrorCode::InvalidParameter, "state_index must be >= 0");
    if (!(tol > 0.0)) throw Error(ErrorCode::InvalidParameter, "tol must be positive");
    if (E_init == 0.0 || !std::isfinite(E_init)) throw Error(ErrorCode::InvalidParameter, "E_init must be non-zero");
    const double sign = E_init > 0 ? 1.0 : -1.0;

    SelfConsistentResult r;
    r.history.push_back(E_init);
    double E = E_init;
    double relax = 1.0;
    double prev_step = 0.0;
    for (int it = 1; it <= max_iter; ++it) {
        const PotentialField field = exact_potential(model, E, grid, map);
        SpectrumResult spec = solve_fixed(field, state_index + 1);
        EigenPair& pair = spec.pairs[static_cast<std::size_t>(state_index)];
        if (pair.lambda < 0.0) {
            std::ostringstream os;
            os << "lambda_" << state_index << " = " << pair.lambda << " < 0 at E=" << E;
            throw Error(ErrorCode::ImaginaryEnergy, os.str());
        }
        double E_new = sign * std::sqrt(pair.lambda);
        const double raw_step = E_new - E;
        if (relax < 1.0) E_new = E + relax * raw_step;
        r.history.push_back(E_new);
        if (std::abs(E_new - E) <= tol) {
            r.pair = std::move(pair);
            r.energy = E_new;
            r.iterations = it;
            return r;
        }
        if (prev_step != 0.0 && raw_step * prev_step < 0.0 && std::abs(raw_step) >= 0.5 * std::abs(prev_step))
            relax = 0.5;
        prev_step = raw_step;
        E = E_new;
    }
    std::ostringstream os;
    os << "self-consistent energy did not converge in " << max_iter << " iterations (last " << E << ")";
    throw NonConvergenceError(os.str(), r.history);
}

namespace {

std::vector<double> box_eigenvalues(double a, double b, double h, const std::function<double(double)>& sampler,
                                    std::size_t k, double& v_lo, double& v_hi) {
    QGrid g;
    g.q_begin = a;
    g.q_end = b;
    g.intervals = static_cast<std::size_t>(std::llround((b - a) / h));
    const std::vector<double> v = sample_values(g, sampler);
    v_lo = v.front();
    v_hi = v.back();
    const double hh = g.h();
    return tridiagonal_lowest(diagonal_for(g, v, 0.0), -1.0 / (hh * hh), k);
}

}  // namespace

QGrid truncate_domain(const TransformMap& map, const std::function<double(double)>& sampler, int k_states,
                      const TruncationPolicy& policy) {
    if (k_states < 1) throw Error(ErrorCode::InvalidParameter, "k_states must be at least 1");
    const bool lo_inf = !std::isfinite(map.q_lo());
    const bool hi_inf = !std::isfinite(map.q_hi());
    if (!lo_inf && !hi_inf) return make_grid(map, policy.base_intervals);

    double reach_lo = policy.initial_half_width;
    double reach_hi = policy.initial_half_width;
    auto lo_end = [&] { return lo_inf ? -reach_lo : map.q_lo(); };
    auto hi_end = [&] { return hi_inf ? reach_hi : map.q_hi(); };
    const double h = (hi_end() - lo_end()) / static_cast<double>(policy.base_intervals);
    const std::size_t k = static_cast<std::size_t>(k_states);

    std::vector<double> history;
    double v_lo = 0.0, v_hi = 0.0;
    std::vector<double> lambdas;
    int expansions = 0;
    for (;;) {
        try {
            lambdas = box_eigenvalues(lo_end(), hi_end(), h, sampler, k, v_lo, v_hi);
        } catch (const Error& e) {
            if (e.code() != ErrorCode::Domain && e.code() != ErrorCode::SingularNode) throw;
            std::ostringstream os;
            os << "potential does not confine: the box reached [" << lo_end() << ", " << hi_end()
               << "] where the model can no longer be evaluated (" << e.what() << ")";
            throw NonConvergenceError(os.str(), lambdas);
        }
        const double need = lambdas.back() + policy.delta;
        const bool lo_ok = !lo_inf || v_lo >= need;
        const bool hi_ok = !hi_inf || v_hi >= need;
        if (lo_ok && hi_ok) break;
        if (++expansions > policy.max_expansions) {
            std::ostringstream os;
            os << "potential does not confine toward q -> " << (lo_ok ? "+inf" : "-inf") << " (V at the box edge is "
               << (lo_ok ? v_hi : v_lo) << ", needs " << need << ")";
            throw NonConvergenceError(os.str(), lambdas);
        }
        if (!lo_ok) reach_lo *= 2;
        if (!hi_ok) reach_hi *= 2;
    }
    history.push_back(lambdas.back());
    for (int d = 0; d < policy.max_doublings; ++d) {
        if (lo_inf) reach_lo *= 2;
        if (hi_inf) reach_hi *= 2;
        const std::vector<double> next = box_eigenvalues(lo_end(), hi_end(), h, sampler, k, v_lo, v_hi);
        double change = 0.0;
        for (std::size_t j = 0; j < k; ++j) change = std::max(change, std::abs(next[j] - lambdas[j]));
        lambdas = next;
        history.push_back(lambdas.back());
        if (change < policy.eig_tol) {
            QGrid g;
            g.q_begin = lo_end();
            g.q_end = hi_end();
            g.intervals = static_cast<std::size_t>(std::llround((g.q_end - g.q_begin) / h));
            g.lo_truncated = lo_inf;
            g.hi_truncated = hi_inf;
            return g;
        }
    }
    throw NonConvergenceError("eigenvalues kept moving while the truncation box was doubled", history);
}

}  // namespace pdmdirac
