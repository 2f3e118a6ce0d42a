#include <doctest.h>

#include "overdet/spectral.hpp"

#include <random>

using namespace overdet;

namespace {
SpectralField random_field(int lmax, int m, unsigned seed, double amp = 1.0) {
    SpectralField f = zero_field(lmax, m);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ud(-amp, amp);
    for (double& c : f.coeffs) c = ud(rng);
    return f;
}
}  // namespace

TEST_CASE("grid weights and exact moments") {
    QuadratureGrid g = make_grid(2, 4);
    double total = 0.0;
    for (int i = 0; i < g.nlat; ++i) total += g.node_weight(i) * g.nlon;
    CHECK(total == doctest::Approx(4.0 * M_PI).epsilon(1e-13));

    // integral of x3^2 = 4 pi / 3
    double mom = 0.0;
    for (int i = 0; i < g.nlat; ++i)
        for (int j = 0; j < g.nlon; ++j) {
            Vec3 p = g.node(i, j);
            mom += g.node_weight(i) * p.z() * p.z();
        }
    CHECK(mom == doctest::Approx(4.0 * M_PI / 3.0).epsilon(1e-13));
}

TEST_CASE("grid orthonormality of Y_{2,0}") {
    QuadratureGrid g = make_grid(4, 4);
    double acc = 0.0;
    for (int i = 0; i < g.nlat; ++i)
        for (int j = 0; j < g.nlon; ++j) {
            Vec3 p = g.node(i, j);
            double y20 = std::sqrt(5.0 / (4.0 * M_PI)) * 0.5 *
                         (3.0 * p.z() * p.z() - 1.0);
            acc += g.node_weight(i) * y20 * y20;
        }
    CHECK(acc == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("project constant") {
    int m = 4, lmax = 8;
    QuadratureGrid g = make_grid(lmax, m);
    std::vector<double> samples(static_cast<std::size_t>(g.nlat) * g.nlon, 1.0);
    SpectralField f = project(g, samples, lmax);
    const auto& modes = mode_table(lmax, m);
    for (std::size_t i = 0; i < modes.size(); ++i) {
        if (modes[i].l == 0)
            CHECK(f.coeffs[i] == doctest::Approx(std::sqrt(4.0 * M_PI)).epsilon(1e-13));
        else
            CHECK(std::abs(f.coeffs[i]) < 1e-13);
    }
}

TEST_CASE("project sin^2 of the equatorial distance is pure l in {0,2}") {
    int m = 8, lmax = 12;
    QuadratureGrid g = make_grid(lmax, m);
    auto r = project_fn(
        g, [](const Vec3& p) { return p.z() * p.z(); }, lmax);
    CHECK(r.discarded_ratio < 1e-12);
    const auto& modes = mode_table(lmax, m);
    // by-hand Legendre expansion: x3^2 = (2 P_2 + 1)/3
    for (std::size_t i = 0; i < modes.size(); ++i) {
        double expect = 0.0;
        if (modes[i].l == 0 && modes[i].k == 0) expect = std::sqrt(4.0 * M_PI) / 3.0;
        if (modes[i].l == 2 && modes[i].k == 0)
            expect = 2.0 / 3.0 * std::sqrt(4.0 * M_PI / 5.0);
        CHECK(std::abs(r.field.coeffs[i] - expect) < 1e-12);
    }
}

TEST_CASE("project rejects a non-symmetric field") {
    int m = 4, lmax = 8;
    QuadratureGrid g = make_grid(lmax, m);
    std::vector<double> samples(static_cast<std::size_t>(g.nlat) * g.nlon);
    for (int i = 0; i < g.nlat; ++i)
        for (int j = 0; j < g.nlon; ++j)
            samples[static_cast<std::size_t>(i) * g.nlon + j] = g.node(i, j).x();
    CHECK_THROWS_AS(project(g, samples, lmax), std::runtime_error);
}

TEST_CASE("solve_L basics") {
    int m = 4, lmax = 6;
    SpectralField rhs = zero_field(lmax, m);
    SpectralField z = solve_L(rhs);
    for (double c : z.coeffs) CHECK(c == 0.0);

    const auto& modes = mode_table(lmax, m);
    for (std::size_t i = 0; i < modes.size(); ++i) {
        SpectralField e = zero_field(lmax, m);
        e.coeffs[i] = 1.0;
        SpectralField u = solve_L(e);
        if (modes[i].l == 0) CHECK(u.coeffs[i] == doctest::Approx(0.5));
        if (modes[i].l == 2) CHECK(u.coeffs[i] == doctest::Approx(-0.25));
    }
}

TEST_CASE("eval of the constant mode") {
    int m = 4, lmax = 4;
    SpectralField f = zero_field(lmax, m);
    f.coeffs[0] = 1.0;  // Y_{0,0}
    auto [v, g] = eval_field_grad(f, Vec3(0.3, -0.5, std::sqrt(1 - 0.34)).normalized());
    CHECK(v == doctest::Approx(1.0 / std::sqrt(4.0 * M_PI)).epsilon(1e-14));
    CHECK(g.norm() < 1e-14);
}

TEST_CASE("gradient matches central finite differences") {
    int m = 4, lmax = 24;
    SpectralField f = random_field(lmax, m, 11);
    std::mt19937_64 rng(3);
    std::normal_distribution<double> nd;
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        Vec3 p(nd(rng), nd(rng), nd(rng));
        if (p.norm() < 0.3) continue;
        p.normalize();
        if (std::abs(p.z()) > 0.999) continue;
        auto [v, g] = eval_field_grad(f, p);
        (void)v;
        // two tangent directions
        Vec3 t1 = p.cross(Vec3(0, 0, 1)).normalized();
        Vec3 t2 = p.cross(t1).normalized();
        double h = 1e-5;
        for (const Vec3& t : {t1, t2}) {
            Vec3 pp = (std::cos(h) * p + std::sin(h) * t);
            Vec3 pm = (std::cos(h) * p - std::sin(h) * t);
            double fd = (eval_field(f, pp) - eval_field(f, pm)) / (2 * h);
            worst = std::max(worst, std::abs(fd - g.dot(t)) /
                                        std::max(1.0, std::abs(fd)));
        }
    }
    CHECK(worst < 1e-7);
}

TEST_CASE("L(solve_L(f)) recovers f at random points") {
    int m = 8, lmax = 30;
    SpectralField f = random_field(lmax, m, 5);
    SpectralField u = solve_L(f);
    SpectralField lu = apply_L(u);
    std::mt19937_64 rng(9);
    std::normal_distribution<double> nd;
    for (int trial = 0; trial < 50; ++trial) {
        Vec3 p(nd(rng), nd(rng), nd(rng));
        if (p.norm() < 0.3) continue;
        p.normalize();
        CHECK(std::abs(eval_field(lu, p) - eval_field(f, p)) < 1e-9);
    }
}

TEST_CASE("round trip: project(eval(f)) == f") {
    int m = 8, lmax = 40;
    SpectralField f = random_field(lmax, m, 23);
    QuadratureGrid g = make_grid(lmax, m);
    auto r = project_fn(g, [&](const Vec3& p) { return eval_field(f, p); }, lmax);
    REQUIRE(r.field.coeffs.size() == f.coeffs.size());
    for (std::size_t i = 0; i < f.coeffs.size(); ++i)
        CHECK(std::abs(r.field.coeffs[i] - f.coeffs[i]) < 1e-12);
}

TEST_CASE("Parseval on band-limited fields") {
    int m = 8, lmax = 24;
    SpectralField f = random_field(lmax, m, 37);
    QuadratureGrid g = make_grid(lmax, m);
    double quad = 0.0;
    for (int i = 0; i < g.nlat; ++i)
        for (int j = 0; j < g.nlon; ++j) {
            double v = eval_field(f, g.node(i, j));
            quad += g.node_weight(i) * v * v;
        }
    CHECK(quad == doctest::Approx(inner_product(f, f)).epsilon(1e-11));
}

TEST_CASE("evaluation is symmetric by construction") {
    int m = 8, lmax = 24;
    SymmetryConfig c = build_config(m, 2);
    SpectralField f = random_field(lmax, m, 91);
    double dev = check_symmetric([&](const Vec3& p) { return eval_field(f, p); }, c,
                                 60, 4);
    CHECK(dev < 1e-11);
}

TEST_CASE("geographic jet matches finite differences") {
    int m = 4, lmax = 16;
    SpectralField f = random_field(lmax, m, 55);
    double beta = 1.1, lam = 0.7, h = 1e-5;
    SphereJet j = eval_field_jet(f, beta, lam);
    auto F = [&](double b, double l) { return eval_field_jet(f, b, l).f; };
    CHECK(j.fb == doctest::Approx((F(beta + h, lam) - F(beta - h, lam)) / (2 * h))
                      .epsilon(1e-7));
    CHECK(j.fl == doctest::Approx((F(beta, lam + h) - F(beta, lam - h)) / (2 * h))
                      .epsilon(1e-7));
    h = 1e-4;
    CHECK(j.fbb ==
          doctest::Approx((F(beta + h, lam) - 2 * j.f + F(beta - h, lam)) / (h * h))
              .epsilon(1e-4));
    CHECK(j.fll ==
          doctest::Approx((F(beta, lam + h) - 2 * j.f + F(beta, lam - h)) / (h * h))
              .epsilon(1e-4));
    CHECK(j.fbl == doctest::Approx((F(beta + h, lam + h) - F(beta + h, lam - h) -
                                    F(beta - h, lam + h) + F(beta - h, lam - h)) /
                                   (4 * h * h))
                       .epsilon(1e-4));
}

TEST_CASE("l=1 block is empty by parity") {
    for (int m : {4, 8}) {
        const auto& modes = mode_table(20, m);
        for (const Mode& mo : modes) CHECK(mo.l != 1);
    }
}
