#include "pdmdirac/spinor.hpp"

#include "pdmdirac/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace pdmdirac {

namespace {

const Complex kI{0.0, 1.0};

// Composite Simpson over node values f[0..n], falling back to a closing
// three-eighths panel when n is odd.
double simpson(const std::vector<double>& f, double h) {
    const std::size_t n = f.size() - 1;
    if (n == 1) return 0.5 * h * (f[0] + f[1]);
    if (n == 2) return h / 3.0 * (f[0] + 4 * f[1] + f[2]);
    std::size_t even_end = n % 2 == 0 ? n : n - 3;
    double s = 0.0;
    for (std::size_t i = 0; i + 2 <= even_end; i += 2) s += f[i] + 4 * f[i + 1] + f[i + 2];
    s *= h / 3.0;
    if (even_end != n) s += 3.0 * h / 8.0 * (f[n - 3] + 3 * f[n - 2] + 3 * f[n - 1] + f[n]);
    return s;
}

}  // namespace

std::vector<double> node_positions(const QGrid& grid, const TransformMap& map) {
    std::vector<double> x(grid.interior());
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = map.inverse(grid.node(i + 1));
    return x;
}

SpinorField reconstruct_from(const QGrid& grid, const std::vector<double>& x, const std::vector<double>& phi,
                             const std::vector<double>& dphi_dq, const ModelSpec& model, double E) {
    const std::size_t n = grid.interior();
    if (x.size() != n || phi.size() != n || dphi_dq.size() != n)
        throw Error(ErrorCode::InvalidParameter, "reconstruct_from: node arrays must match the grid interior");
    SpinorField s;
    s.grid = grid;
    s.E = E;
    s.x = x;
    s.q.resize(n);
    s.v.resize(n);
    s.psi1.resize(n);
    s.psi2.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        s.q[i] = grid.node(i + 1);
        const ProductU p = product_u(model, x[i]);
        const double z2 = E + p.u;
        if (!(z2 > 0.0)) {
            std::ostringstream os;
            os << "E + m v^2 = " << z2 << " is not positive at x=" << x[i];
            throw Error(ErrorCode::ZetaCrossing, os.str());
        }
        const double v = model.velocity()(x[i]);
        const double sv = std::sqrt(v);
        const double sz = std::sqrt(z2);
        s.v[i] = v;
        s.psi1[i] = sz * phi[i] / sv;
        s.psi2[i] = -kI * (0.5 * v * p.du * phi[i] / (z2 * sz) + dphi_dq[i] / sz) / sv;
        if (!std::isfinite(s.psi1[i].real()) || !std::isfinite(s.psi2[i].imag())) {
            std::ostringstream os;
            os << "spinor component is not finite at x=" << x[i];
            throw Error(ErrorCode::SingularNode, os.str());
        }
    }
    return s;
}

SpinorField reconstruct(const EigenPair& pair, const QGrid& grid, const std::vector<double>& x,
                        const ModelSpec& model, double E) {
    const std::size_t N = grid.intervals;
    if (pair.phi.size() != N + 1)
        throw Error(ErrorCode::InvalidParameter, "eigenpair does not live on the given grid");
    const double h = grid.h();
    // Odd reflection through the Dirichlet ends.
    auto at = [&](std::ptrdiff_t i) -> double {
        if (i < 0) return -pair.phi[static_cast<std::size_t>(-i)];
        if (i > static_cast<std::ptrdiff_t>(N)) return -pair.phi[2 * N - static_cast<std::size_t>(i)];
        return pair.phi[static_cast<std::size_t>(i)];
    };
    std::vector<double> phi(N - 1), dphi(N - 1);
    for (std::size_t k = 0; k + 1 < N; ++k) {
        const auto i = static_cast<std::ptrdiff_t>(k + 1);
        phi[k] = pair.phi[k + 1];
        dphi[k] = (at(i - 2) - 8 * at(i - 1) + 8 * at(i + 1) - at(i + 2)) / (12 * h);
    }
    SpinorField s = reconstruct_from(grid, x, phi, dphi, model, E);
    double vmax = 0.0;
    for (const auto& c : s.psi1) vmax = std::max(vmax, std::abs(c.real()));
    for (const auto& c : s.psi1) {
        if (std::abs(c.real()) > 1e-6 * vmax) {
            if (c.real() < 0) {
                for (auto& a : s.psi1) a = -a;
                for (auto& a : s.psi2) a = -a;
            }
            break;
        }
    }
    return s;
}

SpinorField reconstruct(const EigenPair& pair, const QGrid& grid, const ModelSpec& model, const TransformMap& map,
                        double E) {
    return reconstruct(pair, grid, node_positions(grid, map), model, E);
}

ObservableSet observables(const SpinorField& spinor, const ModelSpec& model) {
    (void)model;
    ObservableSet o;
    const std::size_t n = spinor.psi1.size();
    o.rho.resize(n);
    o.j.resize(n);
    std::vector<double> w(n + 2, 0.0);  // rho v_F on all grid nodes
    double wmax = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        o.rho[i] = std::norm(spinor.psi1[i]) + std::norm(spinor.psi2[i]);
        o.j[i] = spinor.v[i] * 2.0 * (std::conj(spinor.psi1[i]) * spinor.psi2[i]).real();
        w[i + 1] = o.rho[i] * spinor.v[i];
        wmax = std::max(wmax, w[i + 1]);
    }
    if (n >= 4) {
        w[0] = std::max(0.0, 4 * w[1] - 6 * w[2] + 4 * w[3] - w[4]);
        w[n + 1] = std::max(0.0, 4 * w[n] - 6 * w[n - 1] + 4 * w[n - 2] - w[n - 3]);
    }
    auto check_tail = [&](bool truncated, double value, const char* side) {
        if (truncated && value > 1e-8 * wmax) {
            std::ostringstream os;
            os << "density has not decayed at the " << side << " truncation edge (rho v = " << value
               << "); the state is not normalizable on this box";
            throw Error(ErrorCode::NonNormalizable, os.str());
        }
    };
    if (n > 0) {
        check_tail(spinor.grid.lo_truncated, w[1], "lower");
        check_tail(spinor.grid.hi_truncated, w[n], "upper");
    }
    o.total_prob = simpson(w, spinor.grid.h());
    if (!std::isfinite(o.total_prob) || !(o.total_prob > 0.0))
        throw Error(ErrorCode::NonNormalizable, "total probability is not a positive finite number");
    return o;
}

SpinorField normalize(const SpinorField& spinor, const ModelSpec& model) {
    const ObservableSet o = observables(spinor, model);
    SpinorField s = spinor;
    const double f = 1.0 / std::sqrt(o.total_prob);
    for (auto& a : s.psi1) a *= f;
    for (auto& a : s.psi2) a *= f;
    s.norm_constant = f;
    return s;
}

double dirac_residual(const SpinorField& spinor, const ModelSpec& model, double E) {
    const std::size_t n = spinor.psi1.size();
    if (n < 3) return 0.0;
    const double h = spinor.grid.h();
    std::vector<Complex> t1(n), t2(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double f = std::sqrt(spinor.v[i]);
        t1[i] = f * spinor.psi1[i];
        t2[i] = f * spinor.psi2[i];
    }
    double res = 0.0, norm = 0.0;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double u = product_u(model, spinor.x[i]).u;
        const double z1 = E - u, z2 = E + u;
        const Complex d1 = (t1[i + 1] - t1[i - 1]) / (2 * h);
        const Complex d2 = (t2[i + 1] - t2[i - 1]) / (2 * h);
        const Complex r1 = -kI * d2 - z1 * t1[i];
        const Complex r2 = -kI * d1 - z2 * t2[i];
        res += std::norm(r1) + std::norm(r2);
        norm += std::norm(t1[i]) + std::norm(t2[i]);
    }
    if (norm == 0.0) return 0.0;
    return std::sqrt(res / norm);
}

SpinorField bic_family(const ModelSpec& model, double E, std::size_t intervals, double quad_tol) {
    const auto A = detect_constant_u(model, 1e-9);
    if (!A) throw Error(ErrorCode::InvalidParameter, "bic_family needs a model with constant m v^2");
    const double k2 = E * E - *A * *A;
    if (k2 < 0.0) {
        std::ostringstream os;
        os << "E=" << E << " lies inside the gap |E| < " << *A;
        throw Error(ErrorCode::SubGap, os.str());
    }
    const TransformMap map = build_transform(model.velocity(), model.anchor(), quad_tol);
    if (!std::isfinite(map.q_lo()) || !std::isfinite(map.q_hi()))
        throw Error(ErrorCode::NonNormalizable, "the q-range is infinite; the unquantized state is a plane wave");
    const QGrid grid = make_grid(map, intervals);
    const double k = std::sqrt(k2);
    std::vector<double> phi(grid.interior()), dphi(grid.interior());
    for (std::size_t i = 0; i < phi.size(); ++i) {
        const double q = grid.node(i + 1);
        if (k == 0.0) {
            phi[i] = q;
            dphi[i] = 1.0;
        } else {
            phi[i] = std::sin(k * q) / k;
            dphi[i] = std::cos(k * q);
        }
    }
    return normalize(reconstruct_from(grid, node_positions(grid, map), phi, dphi, model, E), model);
}

}  // namespace pdmdirac
