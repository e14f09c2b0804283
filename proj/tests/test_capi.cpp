#include "catch_amalgamated.hpp"
#include "pdmdirac/pdmdirac.h"

#include <cmath>
#include <numbers>
#include <string>

TEST_CASE("model lifecycle and constant-u query") {
    const char* keys[] = {"alpha", "v0", "m0"};
    const double vals[] = {1.0, 1.0, 0.5};
    pdd_model* m = nullptr;
    REQUIRE(pdd_model_create("Rational", keys, vals, 3, &m) == PDD_OK);
    REQUIRE(m != nullptr);
    int is_const = 0;
    double A = 0;
    CHECK(pdd_model_constant_u(m, 1e-9, &is_const, &A) == PDD_OK);
    CHECK(is_const == 1);
    CHECK(A == Catch::Approx(0.5));
    pdd_model_destroy(m);
}

TEST_CASE("errors come back as status codes with a message") {
    const char* keys[] = {"alpha", "m0"};
    const double vals[] = {1.0, 0.0};
    pdd_model* m = reinterpret_cast<pdd_model*>(0x1);
    CHECK(pdd_model_create("Rational", keys, vals, 2, &m) == PDD_ERR_INVALID_PARAMETER);
    CHECK(m == nullptr);
    CHECK(std::string(pdd_last_error()).find("v0") != std::string::npos);
    CHECK(std::string(pdd_status_name(PDD_ERR_INVALID_PARAMETER)) != "unknown");
    CHECK(pdd_model_create("Morse", keys, vals, 2, &m) == PDD_ERR_INVALID_PARAMETER);
    CHECK(pdd_model_create("Rational", keys, vals, 2, nullptr) == PDD_ERR_INVALID_PARAMETER);
    double e = 0;
    CHECK(pdd_analytic_energy("CoshSquare", 0, keys, vals, 2, 0, &e, nullptr) == PDD_ERR_INVALID_PARAMETER);
    double out = 0;
    CHECK(pdd_hyp2f1_polynomial(2, 1.0, -1.0, 0.5, &out) == PDD_ERR_INVALID_PARAMETER);
    CHECK(std::isnan(pdd_hermite(-1, 0.0)));
}

TEST_CASE("solve through the C interface") {
    const char* keys[] = {"alpha", "v0", "m0"};
    const double vals[] = {1.0, 1.0, 0.0};
    pdd_model* m = nullptr;
    REQUIRE(pdd_model_create("CoshSquare", keys, vals, 3, &m) == PDD_OK);
    pdd_spectrum* s = nullptr;
    REQUIRE(pdd_solve(m, "auto", 2000, 3, &s) == PDD_OK);
    CHECK(pdd_spectrum_size(s) == 3);
    for (size_t k = 0; k < 3; ++k) {
        double lambda, ep, em, err;
        int nodes;
        REQUIRE(pdd_spectrum_state(s, k, &lambda, &ep, &em, &nodes, &err) == PDD_OK);
        CHECK(ep == Catch::Approx((k + 1) * std::numbers::pi / 2).epsilon(1e-7));
        CHECK(em == -ep);
        CHECK(nodes == static_cast<int>(k));
        double ref = 0;
        int verified = 0;
        REQUIRE(pdd_analytic_energy("CoshSquare", static_cast<int>(k + 1), keys, vals, 3, 0, &ref, &verified) == PDD_OK);
        CHECK(verified == 1);
        CHECK(ep == Catch::Approx(ref).epsilon(1e-7));
    }
    CHECK(pdd_spectrum_state(s, 3, nullptr, nullptr, nullptr, nullptr, nullptr) == PDD_ERR_INVALID_PARAMETER);
    pdd_spectrum_destroy(s);
    CHECK(pdd_solve(m, "approximate", 2000, 1, &s) == PDD_ERR_APPROXIMATION_INVALID);
    CHECK(pdd_solve(m, "auto", 10, 1, &s) == PDD_ERR_INVALID_PARAMETER);
    pdd_model_destroy(m);

    const char* lk[] = {"A", "v0"};
    const double lv[] = {1.0, 1.0};
    REQUIRE(pdd_model_create("LinearSingular", lk, lv, 2, &m) == PDD_OK);
    CHECK(pdd_solve(m, "auto", 1000, 1, &s) == PDD_ERR_NON_CONVERGENCE);
    pdd_model_destroy(m);
}

TEST_CASE("special functions") {
    CHECK(pdd_hermite(3, 0.5) == Catch::Approx(8 * 0.125 - 12 * 0.5));
    double v = 0;
    REQUIRE(pdd_hyp2f1_polynomial(1, 2.0, 4.0, 0.5, &v) == PDD_OK);
    CHECK(v == Catch::Approx(1 - 2.0 / 4.0 * 0.5));
    CHECK(std::string(pdd_config_help()).find("model.name") != std::string::npos);
}
