#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "mrf/converse.hpp"
#include "mrf/system.hpp"

using namespace mrf;

namespace {

KLFunction beta_2r_exp() {
    return KLFunction::from_function([](double r, double t) { return 2.0 * r * std::exp(-t); },
                                     linspace(0.0, 6.0, 25), linspace(0.0, 20.0, 401), 1.0);
}

BracketPair identity_brackets() {
    auto xs = geomspace(1e-6, 300.0, 600);
    return BracketPair{MonotoneTable::from_function([](double r) { return r; }, xs),
                       MonotoneTable::from_function([](double r) { return r; }, xs)};
}

}  // namespace

TEST_CASE("bilateral sequence contracts by 4 for beta(r,0)=2r and identity brackets") {
    const auto seq = build_bilateral_sequence(beta_2r_exp(), identity_brackets(), -3, 6);
    REQUIRE(seq.at(0) == 1.0);
    for (int i = -3; i <= 6; ++i)
        REQUIRE(seq.at(i) == Catch::Approx(std::pow(4.0, -i)).epsilon(1e-6));
    for (int i = seq.i_min + 1; i <= seq.i_max; ++i) REQUIRE(seq.at(i) < seq.at(i - 1));
}

TEST_CASE("strip index uses the right-closed convention") {
    const auto seq = build_bilateral_sequence(beta_2r_exp(), identity_brackets(), -3, 6);
    REQUIRE(seq.strip_index(1.0) == 1);    // r_0 = 1 belongs to (r_1, r_0]
    REQUIRE(seq.strip_index(2.0) == 0);    // 2 in (1, 4]
    REQUIRE(seq.strip_index(0.25) == 2);   // r_1 belongs to (r_2, r_1]
    REQUIRE(seq.strip_index(5.0) == -1);   // 5 in (4, 16]
    REQUIRE_THROWS_AS(seq.strip_index(1e-9), RangeError);
}

TEST_CASE("ell1 from the exponential descent rate") {
    const auto ell1 = build_ell1(beta_2r_exp(), 20.0);
    // beta(1,t) = 2 e^{-t}: tau(1) = ln 2, tau(2) = 0, tau(3) = -1
    REQUIRE(ell1.tau(1.0) == Catch::Approx(std::log(2.0)).margin(5e-3));
    REQUIRE(ell1.tau(2.0) == Catch::Approx(0.0).margin(1e-9));
    REQUIRE(ell1.tau(3.0) == Catch::Approx(-1.0).margin(1e-9));
    REQUIRE(ell1.value(1.0) == Catch::Approx(0.5).margin(3e-3));
    REQUIRE(ell1.value(2.0) == Catch::Approx(2.0).margin(1e-9));
    REQUIRE(ell1.value(3.0) == Catch::Approx(3.0 * std::exp(1.0)).margin(1e-9));
    REQUIRE(ell1.table.strictly_increasing());
}

TEST_CASE("kappa on unit-speed and scaled systems") {
    const auto ell1 = build_ell1(beta_2r_exp(), 20.0);
    const auto sys = make_int1d_mintime();
    // |f| = |u| <= 1 with the bound attained: kappa = ell1(b)
    REQUIRE(kappa(0.5, 1.0, sys, ell1.value) ==
            Catch::Approx(ell1.value(0.5)).margin(1e-12));
    auto fast = sys;
    fast.dynamics = [](const Vec&, const Vec& u) { return Vec{2.0 * u[0]}; };
    REQUIRE(kappa(0.5, 1.0, fast, ell1.value) ==
            Catch::Approx(0.5 * ell1.value(0.5)).margin(1e-12));
}

TEST_CASE("kappa on zermelo matches the drift speed bound") {
    const auto ell1 = build_ell1(beta_2r_exp(), 20.0);
    CatalogParams cp;
    cp.control_count = 16;
    cp.drift = {0.5, 0.0};
    const auto sys = make_zermelo(cp);
    // max speed = |drift| + 1 = 1.5, attained at the theta = 0 sample
    REQUIRE(kappa(0.5, 1.0, sys, ell1.value) ==
            Catch::Approx(ell1.value(0.5) / 1.5).margin(1e-12));
}

TEST_CASE("kappa with an empty annulus in the sample box is a geometry error") {
    const auto ell1 = build_ell1(beta_2r_exp(), 20.0);
    const auto sys = make_int1d_mintime();
    KappaOptions ko;
    ko.sample_box = {{-0.2}, {0.2}};  // annulus [5,6] cannot intersect
    REQUIRE_THROWS_AS(kappa(5.0, 6.0, sys, ell1.value, ko), GeometryError);
}

TEST_CASE("uniform strip-crossing times for exponential decay") {
    ControlSystem decay;
    decay.name = "decay";
    decay.state_dim = 1;
    decay.control_samples = {{0.0}};
    decay.dynamics = [](const Vec& x, const Vec&) { return Vec{-x[0]}; };
    decay.running_cost = [](const Vec&, const Vec&) { return 0.0; };
    decay.target_distance = [](const Vec& x) { return std::abs(x[0]); };

    const auto seq = build_bilateral_sequence(beta_2r_exp(), identity_brackets(), -3, 6);
    UniformTimeOptions opts;
    opts.samples_per_strip = 40;
    opts.safety_factor = 1.5;
    const auto ut = estimate_uniform_times(decay, [](const Vec&) { return Vec{0.0}; }, seq,
                                           {{-20.0}, {20.0}}, -1, 4, opts);
    // crossing from the strip top r_{i-1} = 4 r_i to the midpoint 0.625 r_i
    // takes ln 6.4 for x' = -x, independent of the strip
    const double expect = std::log(6.4);
    for (int i = -1; i <= 4; ++i) {
        REQUIRE(ut.at(i) / opts.safety_factor <= expect + 0.01);
        REQUIRE(ut.at(i) / opts.safety_factor >= std::log(4.0));
    }
    // T(R) = 0 for R <= r_1
    REQUIRE(ut.time_of(0.2) == 0.0);
    REQUIRE(ut.time_of(0.25) == 0.0);
    // T(R) accumulates strips i(R)..1 for larger R
    REQUIRE(ut.time_of(2.0) == Catch::Approx(ut.at(0) + ut.at(1)).margin(1e-12));
    REQUIRE(ut.time_of(5.0) == Catch::Approx(ut.at(-1) + ut.at(0) + ut.at(1)).margin(1e-12));
    // partial sums grow without settling
    REQUIRE(ut.cumulative(-1, 3) > ut.cumulative(-1, 2));
}

TEST_CASE("phi majorizes the per-strip cost step and psi shifts the anchor") {
    const auto seq = build_bilateral_sequence(beta_2r_exp(), identity_brackets(), -5, 8);
    const auto beta = beta_2r_exp();
    const auto pp = build_phi_psi(seq, identity_brackets(), beta);
    REQUIRE(kStripCostConstant == Catch::Approx(2.0 / 3.0));
    // Phi(r_i) = (2/3) d_plus(r_{i-2}) = (32/3) 4^{-i} for identity brackets
    for (int i = -3; i <= 6; ++i)
        REQUIRE(pp.phi(seq.at(i)) ==
                Catch::Approx((32.0 / 3.0) * std::pow(4.0, -i)).epsilon(1e-5));
    REQUIRE(pp.majorization_worst_gap <= 1e-12);
    REQUIRE(pp.psi(0.0) == Catch::Approx(beta.value(1.0, 0.0) + 2.0).margin(1e-12));
}

TEST_CASE("ell sequence anchors, bump plateau, and monotonicity") {
    const auto beta = beta_2r_exp();
    const auto ell1 = build_ell1(beta, 40.0);
    const auto sys = make_int1d_mintime();
    const auto phi = MonotoneTable::from_function([](double r) { return r + 1.0; },
                                                  linspace(0.0, 20.0, 41));
    const std::size_t j_max = 6;
    const auto es = build_ell_sequence(j_max, beta, phi, [](double) { return 1.0; }, sys, ell1);

    // stability anchor: ell_{j+1} = ell_j exactly on R <= beta(j, 0)
    for (std::size_t j = 1; j < j_max; ++j) {
        const double anchor = beta.value(static_cast<double>(j), 0.0);
        for (std::size_t k = 0; k < es.ladder.size(); ++k) {
            if (es.ladder[k] > anchor) break;
            REQUIRE(es.levels[j][k] == es.levels[j - 1][k]);
        }
    }
    // hand-computed first bump: L_1 = ell_1(2)*1 + 2 = 4, kappa_1 = ell1(3) = 3e,
    // plateau = (4 + phi(1)) / (3e) = 2/e
    REQUIRE(es.plateau[0] == Catch::Approx(2.0 / std::exp(1.0)).margin(1e-9));
    // multiplicative bump at the plateau midpoint R = beta(1,0) + 1.5 = 3.5
    const double mid = 3.5;
    for (std::size_t k = 0; k < es.ladder.size(); ++k)
        if (es.ladder[k] == mid)
            REQUIRE(es.levels[1][k] ==
                    Catch::Approx((1.0 + es.plateau[0]) * es.levels[0][k]).epsilon(1e-12));
    // pointwise monotone in j
    for (std::size_t j = 1; j < j_max; ++j)
        for (std::size_t k = 0; k < es.ladder.size(); ++k)
            REQUIRE(es.levels[j][k] >= es.levels[j - 1][k]);
    REQUIRE(es.final_table.strictly_increasing());
}

TEST_CASE("J functional: finite, divergent, and degenerate cases") {
    const auto sys = make_int1d_mintime();
    JParams p;
    p.dt = 1e-3;
    p.horizon = 50.0;
    p.target_tol = 1e-3;
    p.box = {{-1e6}, {1e6}};
    p.cap = 5.0;

    // u = -1 from 0.5: J = int_0^{t*} [(0.4 - t) + 1] dt at band entry t* ~ 0.399
    auto ell_id = [](double r) { return r; };
    const auto fin = evaluate_J(sys, ell_id, {0.5},
                                [](double, const Vec&) { return Vec{-1.0}; }, p);
    REQUIRE_FALSE(fin.infinite);
    REQUIRE(fin.flag == TerminalFlag::reached_target);
    const double tstar = 0.399;
    const double expect = 0.4 * tstar - 0.5 * tstar * tstar + tstar;
    REQUIRE(fin.value == Catch::Approx(expect).margin(3e-3));

    // outward drive: integrand bounded below, cap fires
    const auto inf = evaluate_J(sys, ell_id, {0.5},
                                [](double, const Vec&) { return Vec{1.0}; }, p);
    REQUIRE(inf.infinite);

    // zero integrand degenerate config
    auto free_sys = sys;
    free_sys.running_cost = [](const Vec&, const Vec&) { return 0.0; };
    const auto zero = evaluate_J(free_sys, [](double) { return 0.0; }, {0.5},
                                 [](double, const Vec&) { return Vec{-1.0}; }, p);
    REQUIRE(zero.value == 0.0);
    REQUIRE_FALSE(zero.infinite);
}

TEST_CASE("confinement inequality holds on annulus-confined paths") {
    // int ell1(d) dt >= kappa(b,c) |displacement| for paths staying in the annulus
    const auto ell1 = build_ell1(beta_2r_exp(), 20.0);
    const auto sys = make_int1d_mintime();
    const double b = 0.5, c = 1.2;
    const double k = kappa(b, c, sys, ell1.value);
    // constant-control path from d = 1.1 down to d = 0.6 stays inside [b, c]
    Vec x{1.2};  // d = 1.1
    const double dt = 1e-3;
    double integral = 0.0;
    Vec x0 = x;
    while (sys.target_distance(x) > 0.6) {
        const double g0 = ell1.value(sys.target_distance(x));
        x = rk4_step(sys, x, {-1.0}, dt);
        integral += 0.5 * dt * (g0 + ell1.value(sys.target_distance(x)));
    }
    REQUIRE(integral >= k * dist2(x0, x) - 1e-6);
}
