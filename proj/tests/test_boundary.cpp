#include <doctest.h>

#include "overdet/boundary.hpp"

#include <random>

using namespace overdet;

namespace {
const MatchingData& md12() {
    static MatchingData md = solve_matching(build_config(12, 2));
    return md;
}
const OperatorContext& ctx12() {
    static OperatorContext ctx(md12());
    return ctx;
}
}  // namespace

TEST_CASE("bf_from_samples basics") {
    const MatchingData& md = md12();
    int n = 128;
    std::vector<double> ones(n, 1.0);
    BoundaryFunction b = bf_from_samples(md, ones, ones, 8, 24);
    CHECK(b.a0[0] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(b.a0[1] == doctest::Approx(1.0).epsilon(1e-15));
    for (int k = 2; k <= 8; k += 2) CHECK(std::abs(b.mode(0, k)) < 1e-15);
    CHECK(std::abs(b.mode(1, 24)) < 1e-13);

    std::vector<double> c2(n), zero(n, 0.0);
    for (int j = 0; j < n; ++j) c2[j] = std::cos(2.0 * (2.0 * M_PI * j / n));
    BoundaryFunction b2 = bf_from_samples(md, c2, zero, 8, 24);
    CHECK(b2.mode(0, 2) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(std::abs(b2.a0[0]) < 1e-15);
    for (int k = 4; k <= 8; k += 2) CHECK(std::abs(b2.mode(0, k)) < 1e-15);

    // k = 1 is not representable on either family
    std::vector<double> c1(n);
    for (int j = 0; j < n; ++j) c1[j] = std::cos(2.0 * M_PI * j / n);
    CHECK_THROWS_AS(bf_from_samples(md, c1, zero, 8, 24), std::runtime_error);
    CHECK_THROWS_AS(BoundaryFunction::zero(md).set_mode(0, 3, 1.0),
                    std::invalid_argument);
    CHECK_THROWS_AS(BoundaryFunction::zero(md).set_mode(1, 12, 1.0),
                    std::invalid_argument);
}

TEST_CASE("avg, cstar, osc decompositions") {
    const MatchingData& md = md12();
    BoundaryFunction v = BoundaryFunction::zero(md);
    v.a0[0] = 0.3;
    v.a0[1] = -0.7;
    v.set_mode(0, 4, 0.2);
    BoundaryFunction o = v.osc();
    CHECK(std::abs(o.avg()) < 1e-15);
    CHECK(o.mode(0, 4) == doctest::Approx(0.2));
    BoundaryFunction p = v.ptilde_osc();
    CHECK(std::abs(p.cstar()) < 1e-14);
    // the balanced low pair characterizes osc-low functions
    double w0 = v.measure(0), w2 = v.measure(1);
    CHECK(std::abs(w0 * o.a0[0] + w2 * o.a0[1]) < 1e-15 * (w0 + w2));
}

TEST_CASE("flat DtN multiplier is the analytic eigenrelation") {
    const MatchingData& md = md12();
    CHECK(dtn_flat_multiplier(md, 0, 2) ==
          doctest::Approx(2.0 * md.tau0 / std::sin(md.tau0)).epsilon(1e-15));
    // small-radius expansion 2(1 + tau^2/6)
    CHECK(dtn_flat_multiplier(md, 0, 2) ==
          doctest::Approx(2.0 * (1.0 + md.tau0 * md.tau0 / 6.0)).epsilon(1e-7));
    CHECK(dtn_flat_multiplier(md, 1, 24) ==
          doctest::Approx(24.0 * md.tau2 / std::sin(md.tau2)).epsilon(1e-15));
}

TEST_CASE("h_flat layers decay like (tau/r)^k and reject low parts") {
    const MatchingData& md = md12();
    auto geo = make_disk_geometry(md);
    BoundaryFunction v = BoundaryFunction::zero(md);
    v.set_mode(0, 2, 1.0);
    v.set_mode(0, 6, 0.5);
    ExteriorField u = h_flat(geo, v);
    // value at r = 2 tau on the theta = 0 ray
    for (int k : {2, 6}) {
        double a = k == 2 ? 1.0 : 0.5;
        Vec3 p = collar_point(*geo, 0, -md.tau0, 0.0);  // r = 2 tau0
        (void)p;
        // isolate the mode by Fourier analysis on the circle r = 2 tau0
        int n = 64;
        double acc = 0;
        for (int j = 0; j < n; ++j) {
            double th = 2.0 * M_PI * j / n;
            acc += u.value(collar_point(*geo, 0, -md.tau0, th)) * std::cos(k * th);
        }
        acc *= 2.0 / n;
        CHECK(acc == doctest::Approx(a * std::pow(0.5, k)).epsilon(1e-12));
    }
    BoundaryFunction bad = v;
    bad.a0[0] = 0.1;
    CHECK_THROWS_AS(h_flat(geo, bad), std::invalid_argument);
    // zero input -> zero extension
    ExteriorField z = h_flat(geo, BoundaryFunction::zero(md));
    CHECK(z.layers.empty());
}

TEST_CASE("h_L reproduces the oscillatory trace exactly") {
    const OperatorContext& ctx = ctx12();
    const MatchingData& md = md12();
    // zero input
    auto z = ctx.h_L(BoundaryFunction::zero(md));
    CHECK(z.trace.norm() < 1e-14);

    BoundaryFunction v = BoundaryFunction::zero(md);
    v.set_mode(0, 2, 0.8);
    v.set_mode(0, 4, -0.15);
    v.a0[1] = 0.4;
    v.a0[0] = -0.4 * v.measure(1) / v.measure(0);
    auto ext = ctx.h_L(v);
    BoundaryFunction diff = ext.trace.osc();
    diff.axpy(-1.0, v);
    CHECK(diff.sup_value() < 1e-12);
    // average trace is small: |(u|dD)_avg| <= (5/sqrt m) ||v||
    CHECK(std::abs(ext.avg_trace) <= 5.0 / std::sqrt(12.0) * v.norm());
}

TEST_CASE("h_L of the balanced low pair follows the Phi2 profile ratio") {
    const OperatorContext& ctx = ctx12();
    const MatchingData& md = md12();
    BoundaryFunction v = BoundaryFunction::zero(md);
    v.a0[1] = 1.0;
    v.a0[0] = -v.measure(1) / v.measure(0);
    auto ext = ctx.h_L(v);
    double u0 = ext.trace.a0[0], u2 = ext.trace.a0[1];
    double ratio = (u2 / u0) / phi2_profile(md.tau2).f;
    CHECK(std::abs(1.0 - ratio) < 5.0 / std::sqrt(12.0));
}

TEST_CASE("h_L single high mode: small average, linearity, symmetry") {
    const OperatorContext& ctx = ctx12();
    const MatchingData& md = md12();
    BoundaryFunction v = BoundaryFunction::zero(md);
    v.set_mode(0, 2, 1.0);
    auto ext = ctx.h_L(v);
    CHECK(std::abs(ext.avg_trace) <= 5.0 / std::sqrt(12.0) * v.norm());

    // linearity: h_L(a v + b w) = a h_L(v) + b h_L(w) pointwise
    BoundaryFunction w = BoundaryFunction::zero(md);
    w.set_mode(0, 4, 1.0);
    BoundaryFunction vw = v;
    vw.scale(0.3);
    vw.axpy(-1.7, w);
    auto e1 = ctx.h_L(v), e2 = ctx.h_L(w), e3 = ctx.h_L(vw);
    std::mt19937_64 rng(17);
    std::normal_distribution<double> nd;
    int checked = 0;
    while (checked < 25) {
        Vec3 p(nd(rng), nd(rng), nd(rng));
        if (p.norm() < 0.3) continue;
        p.normalize();
        double d0 = dist_to_set(p, md.config.L0).first;
        double d2 = dist_to_set(p, md.config.L2).first;
        if (d0 < md.tau0 || d2 < md.tau2) continue;
        double lin = 0.3 * e1.field.value(p) - 1.7 * e2.field.value(p);
        CHECK(std::abs(e3.field.value(p) - lin) < 1e-10);
        ++checked;
    }

    // symmetry of the output field
    double dev = check_symmetric(
        [&](const Vec3& p) {
            double d0 = dist_to_set(p, md.config.L0).first;
            double d2 = dist_to_set(p, md.config.L2).first;
            if (d0 < md.tau0 || d2 < md.tau2) return 0.0;
            return ext.field.value(p);
        },
        md.config, 60, 3);
    CHECK(dev < 1e-9);
}

TEST_CASE("h_L satisfies the equation: hatted collocation residual") {
    const OperatorContext& ctx = ctx12();
    const MatchingData& md = md12();
    BoundaryFunction v = BoundaryFunction::zero(md);
    v.set_mode(0, 2, 1.0);
    v.set_mode(1, 24, 0.3);
    auto ext = ctx.h_L(v);
    // off-band points: residual is the spectral tail of the band correction
    std::mt19937_64 rng(7);
    std::normal_distribution<double> nd;
    double sup = 0.0;
    int found = 0;
    const auto& geo = *ctx.geometry();
    while (found < 200) {
        Vec3 p(nd(rng), nd(rng), nd(rng));
        if (p.norm() < 0.3) continue;
        p.normalize();
        double d0 = dist_to_set(p, md.config.L0).first;
        double d2 = dist_to_set(p, md.config.L2).first;
        if (d0 < md.tau0 || d2 < md.tau2) continue;
        (void)geo;
        sup = std::max(sup,
                       md.tau0 * md.tau0 * std::abs(ext.field.lap_plus2(p)));
        ++found;
    }
    CHECK(sup < 1e-6 * v.norm());
}

TEST_CASE("op_B acts like the shifted DtN on high modes") {
    const OperatorContext& ctx = ctx12();
    const MatchingData& md = md12();
    BoundaryFunction z = ctx.op_B(BoundaryFunction::zero(md));
    CHECK(z.norm() < 1e-13);
    for (int k : {2, 4, 8}) {
        BoundaryFunction v = BoundaryFunction::zero(md);
        v.set_mode(0, k, 1.0);
        BoundaryFunction B = ctx.op_B(v);
        double expect = dtn_flat_multiplier(md, 0, k) - 1.0;
        BoundaryFunction diff = B;
        diff.axpy(-expect, v);
        CHECK(diff.sup_value() <= 5.0 / std::sqrt(12.0) * v.sup_value());
    }
}

TEST_CASE("op_B is consistent with op_R on the low block") {
    const OperatorContext& ctx = ctx12();
    const MatchingData& md = md12();
    BoundaryFunction e = BoundaryFunction::zero(md);
    e.a0[1] = 1.0;
    e.a0[0] = -e.measure(1) / e.measure(0);
    BoundaryFunction rt = ctx.op_R_tilde(e);
    BoundaryFunction brt = ctx.op_B(rt);
    brt.axpy(-1.0, e);
    CHECK(brt.sup_value() <= 5.0 / std::sqrt(12.0) * e.sup_value());
}

TEST_CASE("op_R is a right inverse of op_B") {
    for (int m : {12, 16, 24}) {
        MatchingData md = solve_matching(build_config(m, 2));
        OperatorContext ctx(md);
        CHECK(ctx.br_deviation() < 5.0 / std::sqrt(double(m)));
        std::mt19937_64 rng(101 + m);
        std::uniform_real_distribution<double> ud(-1.0, 1.0);
        BoundaryFunction E = BoundaryFunction::zero(md);
        for (int k = 2; k <= ctx.params().K0; k += 2) E.set_mode(0, k, ud(rng));
        if (ctx.params().K2 >= 2 * m) E.set_mode(1, 2 * m, ud(rng));
        E.a0[1] = ud(rng);
        E.a0[0] = -E.a0[1] * E.measure(1) / E.measure(0);
        BoundaryFunction R = ctx.op_R(E);
        BoundaryFunction BR = ctx.op_B(R);
        BR.axpy(-1.0, E);
        CHECK(BR.sup_value() / E.sup_value() < 1e-6);
        // zero in, zero out
        CHECK(ctx.op_R(BoundaryFunction::zero(md)).norm() < 1e-14);
    }
}

TEST_CASE("j_L: zero source, radial bump, angular bump") {
    const OperatorContext& ctx = ctx12();
    const MatchingData& md = md12();
    const int nr = ctx.params().n_cheb, nt = ctx.n_theta_collar();

    // zero source
    CollarSource z;
    auto jz = ctx.j_L(z);
    CHECK(jz.trace.norm() < 1e-14);

    // radial (locally constant) bump on the equatorial annuli
    CollarSource E;
    E.vals[0].assign(nr * nt, 0.0);
    for (int ir = 0; ir < nr; ++ir) {
        double r = ctx.collar_r(0)[ir];
        double t = (r - md.tau0) / md.tau0;
        double bump = (t > 0.1 && t < 0.9)
                          ? std::exp(-1.0 / (t - 0.1)) * std::exp(-1.0 / (0.9 - t))
                          : 0.0;
        for (int it = 0; it < nt; ++it) E.vals[0][ir * nt + it] = bump;
    }
    auto jr = ctx.j_L(E);
    CHECK(jr.trace.osc().sup_value() < 1e-9);
    CHECK(std::isfinite(jr.avg_trace));

    // mode-2 angular bump; collocation residual of the hatted equation
    CollarSource E2;
    E2.vals[0].assign(nr * nt, 0.0);
    for (int ir = 0; ir < nr; ++ir) {
        double r = ctx.collar_r(0)[ir];
        double t = (r - md.tau0) / md.tau0;
        double bump = (t > 0.1 && t < 0.9)
                          ? std::exp(-1.0 / (t - 0.1)) * std::exp(-1.0 / (0.9 - t))
                          : 0.0;
        for (int it = 0; it < nt; ++it)
            E2.vals[0][ir * nt + it] =
                bump * std::cos(2.0 * ctx.collar_theta(it));
    }
    auto j2 = ctx.j_L(E2, 4, 0);
    CHECK(j2.trace.osc().sup_value() < 1e-9);
    double sup = 0.0, esup = 0.0;
    int count = 0;
    for (int ir = 0; ir < nr && count < 200; ++ir) {
        double r = ctx.collar_r(0)[ir];
        double t = (r - md.tau0) / md.tau0;
        if (t < 0.05 || t > 0.95) continue;
        for (int it = 0; it < nt; it += 16) {
            double th = ctx.collar_theta(it);
            CollarJet u = j2.field.collar_jet(0, md.tau0 - r, th);
            double lap = u.uzz - std::cos(r) / std::sin(r) * u.uz +
                         u.utt / (std::sin(r) * std::sin(r));
            double resid = md.tau0 * md.tau0 * (lap + 2.0 * u.u) -
                           E2.vals[0][ir * nt + it];
            sup = std::max(sup, std::abs(resid));
            esup = std::max(esup, std::abs(E2.vals[0][ir * nt + it]));
            ++count;
        }
    }
    CHECK(sup < 1e-6 * esup);
}

TEST_CASE("under-resolved contexts are detected") {
    MatchingData md = md12();
    ContextParams prm;
    prm.lmax = 8;
    OperatorContext ctx(md, prm);
    CHECK(ctx.band_discard() > 0.1);
}
