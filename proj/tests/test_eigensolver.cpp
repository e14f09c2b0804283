#include "pdmdirac/analytic.hpp"
#include "pdmdirac/eigensolver.hpp"
#include "test_support.hpp"

#include <Eigen/Dense>

#include <numbers>
#include <random>

using namespace pdmdirac;
using std::numbers::pi;

namespace {

// Field on an arbitrary box from a plain function of q.
PotentialField field(double a, double b, std::size_t n, std::function<double(double)> V) {
    PotentialField f;
    f.grid.q_begin = a;
    f.grid.q_end = b;
    f.grid.intervals = n;
    for (std::size_t i = 1; i < n; ++i) {
        const double q = f.grid.node(i);
        f.q.push_back(q);
        f.x.push_back(q);
        f.values.push_back(V(q));
        f.singular.push_back(0);
    }
    f.sampler = V;
    return f;
}

}  // namespace

TEST_CASE("Sturm bisection agrees with a dense symmetric solver") {
    std::mt19937 gen(7);
    std::uniform_real_distribution<double> d(-5.0, 5.0);
    const std::size_t n = 60;
    std::vector<double> diag(n);
    for (auto& v : diag) v = d(gen);
    const double off = -0.8;
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        M(i, i) = diag[i];
        if (i + 1 < n) M(i, i + 1) = M(i + 1, i) = off;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
    const auto ours = tridiagonal_lowest(diag, off, 12);
    REQUIRE(ours.size() == 12);
    for (std::size_t k = 0; k < 12; ++k) CHECK(ours[k] == Catch::Approx(es.eigenvalues()(k)).margin(1e-11));
    const auto vec = tridiagonal_eigenvector(diag, off, ours[3]);
    const Eigen::VectorXd ref = es.eigenvectors().col(3);
    const double sign = ref.dot(Eigen::Map<const Eigen::VectorXd>(vec.data(), n)) > 0 ? 1.0 : -1.0;
    for (std::size_t i = 0; i < n; ++i) CHECK(vec[i] == Catch::Approx(sign * ref(i)).margin(1e-9));
}

TEST_CASE("particle in a box") {
    const auto res = solve_fixed(field(0.0, pi, 1000, [](double) { return 0.0; }), 5);
    REQUIRE(res.pairs.size() == 5);
    for (int k = 0; k < 5; ++k) {
        const auto& p = res.pairs[static_cast<std::size_t>(k)];
        CHECK(p.lambda == Catch::Approx((k + 1.0) * (k + 1.0)).epsilon(1e-9));
        CHECK(p.nodes == k);
        double norm = 0.0;
        for (double y : p.phi) norm += y * y * p.grid_h;
        CHECK(norm == Catch::Approx(1.0).epsilon(1e-12));
        CHECK(p.phi.front() == 0.0);
        CHECK(p.phi.back() == 0.0);
    }
}

TEST_CASE("harmonic oscillator levels and parity") {
    const auto res = solve_fixed(field(-10.0, 10.0, 4000, [](double q) { return q * q; }), 6);
    for (int k = 0; k < 6; ++k) {
        const auto& p = res.pairs[static_cast<std::size_t>(k)];
        CHECK(p.lambda == Catch::Approx(2.0 * k + 1).epsilon(1e-8));
        CHECK(p.nodes == k);
        // Even states are symmetric about the centre, odd ones antisymmetric.
        const std::size_t N = p.phi.size() - 1;
        const double parity = (k % 2 == 0) ? 1.0 : -1.0;
        for (std::size_t i = 0; i <= N; i += 97) CHECK(p.phi[i] == Catch::Approx(parity * p.phi[N - i]).margin(1e-8));
    }
}

TEST_CASE("raw eigenvalue error is second order") {
    auto raw = [](std::size_t n) {
        SolveOptions o;
        o.richardson = false;
        return solve_fixed(field(0.0, pi, n, [](double q) { return 3 * std::sin(q); }), 3, o);
    };
    const auto ref = solve_fixed(field(0.0, pi, 4000, [](double q) { return 3 * std::sin(q); }), 3);
    const auto a = raw(100), b = raw(200), c = raw(400);
    for (std::size_t k = 0; k < 3; ++k) {
        const double e1 = std::abs(a.pairs[k].lambda - ref.pairs[k].lambda);
        const double e2 = std::abs(b.pairs[k].lambda - ref.pairs[k].lambda);
        const double e3 = std::abs(c.pairs[k].lambda - ref.pairs[k].lambda);
        CHECK(e1 / e2 == Catch::Approx(4.0).epsilon(0.05));
        CHECK(e2 / e3 == Catch::Approx(4.0).epsilon(0.05));
    }
}

TEST_CASE("energies from lambda") {
    const auto e = energies_from_lambda(3.0, 1.0);
    CHECK(e.plus == 2.0);
    CHECK(e.minus == -2.0);
    require_code([] { energies_from_lambda(-2.0, 1.0); }, ErrorCode::ImaginaryEnergy);
}

TEST_CASE("constant-u solve carries the A^2 offset") {
    const auto m = builtin_model(BuiltinModel::Rational, {{"alpha", 1.0}, {"v0", 1.0}, {"m0", 0.5}});
    const auto map = build_transform(m.velocity(), m.anchor(), 1e-12);
    const auto res = solve_fixed(constant_u_potential(0.5, make_grid(map, 2000), map), 3);
    CHECK(res.offset == 0.25);
    for (int n = 1; n <= 3; ++n) {
        const double ref = spectrum_value(BuiltinModel::Rational, n, m.params()).plus;
        CHECK(rel_err(res.energies[static_cast<std::size_t>(n - 1)].plus, ref) <= 1e-9);
    }
}

TEST_CASE("resolution and singular-node guards") {
    require_code([] { solve_fixed(field(0.0, 1.0, 8, [](double) { return 0.0; }), 9); },
                 ErrorCode::InsufficientResolution);
    // The 22nd discrete box level has (lambda - min V) h^2 just above one on 64 cells.
    require_code([] { solve_fixed(field(0.0, 1.0, 64, [](double) { return 1e9; }), 22); },
                 ErrorCode::InsufficientResolution);
    CHECK(solve_fixed(field(0.0, 1.0, 64, [](double) { return 1e9; }), 21).pairs.size() == 21);
    auto f = field(0.0, 1.0, 64, [](double) { return 0.0; });
    f.singular[10] = 1;
    require_code([&] { solve_fixed(f, 1); }, ErrorCode::SingularNode);
}

TEST_CASE("self-consistent exact energy") {
    const auto m = builtin_model(BuiltinModel::CoshSquare, {{"alpha", 1.0}, {"v0", 1.0}, {"m0", 1.0}});
    const auto map = build_transform(m.velocity(), m.anchor(), 1e-12);
    const QGrid g = make_grid(map, 2000);
    const auto r = solve_self_consistent(m, map, g, 0, 1.0, 1e-10, 100);
    CHECK(rel_err(r.energy, spectrum_value(BuiltinModel::CoshSquare, 1, m.params()).plus) <= 1e-8);
    CHECK(r.history.front() == 1.0);
    CHECK(r.pair.nodes == 0);

    const auto pt = builtin_model(BuiltinModel::PoschlTeller, {{"alpha", 1.0}, {"v0", 1.0}, {"m0", 1.0}});
    const auto pmap = build_transform(pt.velocity(), pt.anchor(), 1e-12);
    const auto r2 = solve_self_consistent(pt, pmap, make_grid(pmap, 2000), 1, 2.0, 1e-10, 100);
    CHECK(r2.pair.nodes == 1);
    CHECK(r2.energy > 0);
    CHECK(r2.energy * r2.energy == Catch::Approx(r2.pair.lambda).epsilon(1e-8));

    try {
        solve_self_consistent(pt, pmap, make_grid(pmap, 400), 0, 1.5, 1e-16, 1);
        FAIL("expected non-convergence");
    } catch (const NonConvergenceError& e) {
        CHECK(e.history().size() >= 2);
    }
}

TEST_CASE("domain truncation") {
    // Harmonic well on an infinite q-line through a stand-in map.
    const auto line = builtin_model(BuiltinModel::ConstantRest, {{"m0", 1.0}, {"c", 1.0}});
    const auto map = build_transform(line.velocity(), 0.0, 1e-12);
    TruncationPolicy p;
    p.base_intervals = 800;
    const auto V = [](double q) { return q * q; };
    const QGrid g = truncate_domain(map, V, 4, p);
    CHECK(g.lo_truncated);
    CHECK(g.hi_truncated);
    CHECK(g.q_end * g.q_end >= 7.0 + p.delta);
    CHECK(g.h() == Catch::Approx(8.0 / 800).epsilon(1e-12));
    const auto res = solve_fixed(field(g.q_begin, g.q_end, g.intervals, V), 4);
    for (int k = 0; k < 4; ++k) CHECK(res.pairs[static_cast<std::size_t>(k)].lambda == Catch::Approx(2 * k + 1.0).epsilon(1e-7));

    // An exponential wall on one side only never confines.
    try {
        truncate_domain(map, [](double q) { return std::exp(2 * q); }, 1, p);
        FAIL("expected non-convergence");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::NonConvergence);
    }
}

TEST_CASE("node counting ignores numerical dust") {
    CHECK(count_nodes(std::vector<double>{0, 1, 2, 1, 0}) == 0);
    CHECK(count_nodes(std::vector<double>{0, 1, -1, 1, 0}) == 2);
    CHECK(count_nodes(std::vector<double>{0, 1, 1e-14, -1e-14, 1, 0}) == 0);
}
