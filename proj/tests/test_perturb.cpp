#include <doctest.h>

#include "overdet/perturb.hpp"

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
BoundaryFunction small_w(const MatchingData& md, double amp) {
    BoundaryFunction w = BoundaryFunction::zero(md);
    w.set_mode(0, 2, amp);
    w.set_mode(0, 4, -0.3 * amp);
    double a2 = 0.5 * amp;
    w.a0[1] = a2;
    w.a0[0] = -a2 * w.measure(1) / w.measure(0);
    return w;
}
}  // namespace

TEST_CASE("displace: identity, constant shift, cutoff support") {
    const MatchingData& md = md12();
    auto geo = make_disk_geometry(md);
    BoundaryFunction z = BoundaryFunction::zero(md);
    Vec3 p = collar_point(*geo, 0, 0.3 * md.tau0, 0.8);
    CHECK((displace(geo, z, p) - p).norm() < 1e-16);

    // constant v = c moves a boundary point to distance tau - c
    BoundaryFunction c = BoundaryFunction::zero(md);
    double cval = 1e-4;
    c.a0[0] = c.a0[1] = cval;
    Vec3 b = collar_point(*geo, 0, 0.0, 1.1);
    Vec3 d = displace(geo, c, b);
    double dist = geodesic_distance(d, geo->family0[0].center);
    CHECK(dist == doctest::Approx(md.tau0 - cval).epsilon(1e-12));

    // beyond distance tau/3 from the boundary circle nothing moves
    Vec3 farp = collar_point(*geo, 0, -0.40 * md.tau0, 1.1);
    CHECK((displace(geo, c, farp) - farp).norm() < 1e-16);
}

TEST_CASE("pullback consistency between displace and the collar chart") {
    const MatchingData& md = md12();
    auto geo = make_disk_geometry(md);
    BoundaryFunction v = small_w(md, 1e-4);
    for (double th : {0.0, 0.9, 2.2}) {
        Vec3 p = collar_point(*geo, 0, 0.0, th);
        Vec3 lhs = displace(geo, v, p);
        Vec3 rhs = collar_point(*geo, 0, v.eval(0, th), th);
        CHECK((lhs - rhs).norm() < 1e-14);
    }
}

TEST_CASE("collar metric: round at v=0, positive determinant") {
    const MatchingData& md = md12();
    BoundaryFunction z = BoundaryFunction::zero(md);
    for (double zc : {-0.3 * md.tau0, 0.0, 0.2 * md.tau0}) {
        CollarMetric cm = collar_metric(md, 0, z, zc, 0.7);
        CHECK(cm.g_zz == doctest::Approx(1.0).epsilon(1e-15));
        CHECK(cm.g_zt == doctest::Approx(0.0).epsilon(1e-15));
        CHECK(cm.g_tt ==
              doctest::Approx(std::pow(std::sin(md.tau0 - zc), 2)).epsilon(1e-14));
    }
    BoundaryFunction v = small_w(md, 4e-4);  // near the tau2^2 smallness edge
    for (double zc : {-0.2 * md.tau0, 0.1 * md.tau0})
        for (double th : {0.3, 1.7}) {
            CollarMetric cm = collar_metric(md, 0, v, zc, th);
            CHECK(cm.det > 0.0);
        }
}

TEST_CASE("perturbed collar Laplacian: isometry identity and FD oracle") {
    const MatchingData& md = md12();
    BoundaryFunction v = small_w(md, 2e-4);
    // (a) isometry identity: for u(z,t) = f(z + psi v, t), Delta_{g_v} u at
    // (z,t) equals the round collar Laplacian of f at (Z,t).
    auto f = [](double Z, double t) {
        return std::sin(40.0 * Z) * std::cos(2.0 * t) + 0.3 * std::cos(90.0 * Z);
    };
    auto fZ = [](double Z, double t) {
        return 40.0 * std::cos(40.0 * Z) * std::cos(2.0 * t) -
               27.0 * std::sin(90.0 * Z);
    };
    auto fZZ = [](double Z, double t) {
        return -1600.0 * std::sin(40.0 * Z) * std::cos(2.0 * t) -
               2430.0 * std::cos(90.0 * Z);
    };
    auto ft = [](double Z, double t) { return -2.0 * std::sin(40.0 * Z) * std::sin(2.0 * t); };
    auto ftt = [](double Z, double t) { return -4.0 * std::sin(40.0 * Z) * std::cos(2.0 * t); };
    auto fZt = [](double Z, double t) { return -80.0 * std::cos(40.0 * Z) * std::sin(2.0 * t); };
    double tau = md.tau0;
    for (double zc : {-0.35 * tau, -0.1 * tau, 0.12 * tau}) {
        for (double th : {0.4, 2.0}) {
            CollarMetric cm = collar_metric(md, 0, v, zc, th);
            double Z = cm.Z;
            // chart jets of u = f(Z(z,t), t)
            CollarJet u;
            u.u = f(Z, th);
            u.uz = fZ(Z, th) * cm.P;
            u.ut = fZ(Z, th) * cm.psi * cm.vp + ft(Z, th);
            u.uzz = fZZ(Z, th) * cm.P * cm.P + fZ(Z, th) * cm.psipp * cm.v;
            u.uzt = fZZ(Z, th) * cm.P * cm.psi * cm.vp + fZt(Z, th) * cm.P +
                    fZ(Z, th) * cm.psip * cm.vp;
            u.utt = fZZ(Z, th) * cm.psi * cm.vp * cm.psi * cm.vp +
                    2.0 * fZt(Z, th) * cm.psi * cm.vp + ftt(Z, th) +
                    fZ(Z, th) * cm.psi * cm.vpp;
            double lhs = laplace_gv(cm, u);
            // round Laplacian of f at (Z, th)
            CollarJet w;
            w.u = f(Z, th);
            w.uz = fZ(Z, th);
            w.ut = ft(Z, th);
            w.uzz = fZZ(Z, th);
            w.uzt = fZt(Z, th);
            w.utt = ftt(Z, th);
            double rhs = laplace_g0(tau, Z, w);
            CHECK(lhs == doctest::Approx(rhs).epsilon(1e-11));
        }
    }

    // (b) FD oracle: pull a smooth ambient function back through the
    // displacement and difference it in the chart coordinates.
    const OperatorContext& ctx = ctx12();
    auto geo = ctx.geometry();
    SymmetryConfig cfg = md.config;
    auto F = [&](const Vec3& p) { return phi2_eval(p).first; };
    auto U = [&](double zc, double th) {
        return F(displace(geo, v, collar_point(*geo, 0, zc, th)));
    };
    double h = 0.02 * tau;
    for (double zc : {-0.2 * tau}) {
        for (double th : {0.5, 1.9}) {
            CollarJet u;
            u.u = U(zc, th);
            u.uz = (U(zc + h, th) - U(zc - h, th)) / (2 * h);
            u.ut = (U(zc, th + h / tau) - U(zc, th - h / tau)) / (2 * h / tau);
            u.uzz = (U(zc + h, th) - 2 * u.u + U(zc - h, th)) / (h * h);
            u.utt = (U(zc, th + h / tau) - 2 * u.u + U(zc, th - h / tau)) /
                    (h * h / (tau * tau));
            u.uzt = (U(zc + h, th + h / tau) - U(zc + h, th - h / tau) -
                     U(zc - h, th + h / tau) + U(zc - h, th - h / tau)) /
                    (4 * h * h / tau);
            CollarMetric cm = collar_metric(md, 0, v, zc, th);
            double lap = laplace_gv(cm, u);
            // the displaced point carries the round Laplacian of Phi2, which
            // solves (Delta + 2) Phi2 = 0
            Vec3 q = displace(geo, v, collar_point(*geo, 0, zc, th));
            double expect = -2.0 * F(q);
            CHECK(std::abs(lap - expect) < 1e-5 * (1.0 + std::abs(expect)));
        }
    }
    (void)cfg;
}

TEST_CASE("metric components: first variation matches finite differences") {
    const MatchingData& md = md12();
    BoundaryFunction v = small_w(md, 1.5e-4);
    BoundaryFunction hdir = BoundaryFunction::zero(md);
    hdir.set_mode(0, 2, 1.0);
    double eps = 1e-7;
    BoundaryFunction vp = v, vm = v;
    vp.axpy(eps, hdir);
    vm.axpy(-eps, hdir);
    for (double zc : {-0.15 * md.tau0, 0.08 * md.tau0}) {
        for (double th : {0.6, 2.4}) {
            CollarMetric a = collar_metric(md, 0, vp, zc, th);
            CollarMetric b = collar_metric(md, 0, vm, zc, th);
            CollarMetric c = collar_metric(md, 0, v, zc, th);
            Jet2 hj = hdir.eval_jet(0, th);
            // analytic first variations from the closed form
            double dP = c.psip * hj.f;
            double dZ = c.psi * hj.f;
            double dS = -c.C * dZ;
            double dgzz = 2.0 * c.P * dP;
            double dgzt = dP * c.psi * c.vp + c.P * c.psi * hj.df;
            double dgtt = 2.0 * c.psi * c.vp * c.psi * hj.df + 2.0 * c.S * dS;
            CHECK(std::abs((a.g_zz - b.g_zz) / (2 * eps) - dgzz) <
                  1e-6 * (1 + std::abs(dgzz)));
            CHECK(std::abs((a.g_zt - b.g_zt) / (2 * eps) - dgzt) <
                  1e-6 * (1 + std::abs(dgzt)));
            CHECK(std::abs((a.g_tt - b.g_tt) / (2 * eps) - dgtt) <
                  1e-6 * (1 + std::abs(dgtt)));
        }
    }
}

TEST_CASE("normal vector: constant shift keeps nu, tilt is quadratic") {
    const MatchingData& md = md12();
    BoundaryFunction c = BoundaryFunction::zero(md);
    c.a0[0] = c.a0[1] = 1e-4;
    NormalData nd0 = normal_vector(md, 0, c, 0.9);
    CHECK(nd0.ntheta == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(nd0.cos_angle == doctest::Approx(1.0).epsilon(1e-15));

    BoundaryFunction w = BoundaryFunction::zero(md);
    double amp = 2e-4;
    w.set_mode(0, 2, amp);
    double worst = 0.0, bound = 0.0;
    for (int i = 0; i < 64; ++i) {
        double th = 2.0 * M_PI * i / 64;
        NormalData nd = normal_vector(md, 0, w, th);
        worst = std::max(worst, std::abs(nd.cos_angle - 1.0));
        Jet2 j = w.eval_jet(0, th);
        bound = std::max(bound, std::pow(j.df / md.tau0, 2));
        // g_v-normalization of nu_v
        CollarMetric cm = collar_metric(md, 0, w, 0.0, th);
        double norm2 = cm.g_zz * nd.nz * nd.nz + 2.0 * cm.g_zt * nd.nz * nd.ntheta +
                       cm.g_tt * nd.ntheta * nd.ntheta;
        CHECK(norm2 == doctest::Approx(1.0).epsilon(1e-12));
    }
    CHECK(worst <= 2.0 * bound * md.tau0 * md.tau0 / (md.tau0 * md.tau0));
    // |<nu_v, nu> - 1| <= ||dv-hat||^2 within a factor 2 (hatted derivative)
    CHECK(worst <= 2.0 * bound);
}

TEST_CASE("assemble_phi_v at v=0: no perturbed solve, small trace") {
    const OperatorContext& ctx = ctx12();
    const MatchingData& md = md12();
    Candidate c = assemble_phi_v(ctx, BoundaryFunction::zero(md));
    CHECK(c.neumann_terms == 0);
    CHECK(c.xi_tilde.layers.empty());
    CHECK(std::abs(c.trace_avg) <= 10.0 * std::pow(md.tau2, 2.5));
    CHECK(c.trace_osc_sup < 1e-9);
    CHECK_THROWS_AS(assemble_phi_v(ctx, small_w(md, 1.0)), std::invalid_argument);
}

TEST_CASE("metric-difference source scales linearly in v") {
    const OperatorContext& ctx = ctx12();
    const MatchingData& md = md12();
    Candidate c = assemble_phi_v(ctx, BoundaryFunction::zero(md));
    auto sup_src = [&](double amp) {
        BoundaryFunction v = small_w(md, amp);
        CollarSource E = metric_difference_source(ctx, v, c.xi.jets);
        double sup = 0;
        for (int f = 0; f < 2; ++f)
            for (double x : E.vals[f]) sup = std::max(sup, std::abs(x));
        return sup;
    };
    double s1 = sup_src(1e-4), s2 = sup_src(2e-4);
    CHECK(s2 / s1 == doctest::Approx(2.0).epsilon(0.2));
}

TEST_CASE("solve_f: small constant, Lipschitz in w, tight residual") {
    const OperatorContext& ctx = ctx12();
    const MatchingData& md = md12();
    double scale = std::pow(md.tau2, 2.5);
    Candidate cand;
    double f0 = solve_f(ctx, BoundaryFunction::zero(md), 0.0, &cand);
    CHECK(std::abs(f0) <= 10.0 * scale);
    CHECK(std::abs(cand.trace_avg) < 1e-10 * md.tau2);

    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> ud(-1.0, 1.0);
    for (int trial = 0; trial < 2; ++trial) {
        BoundaryFunction w = small_w(md, 0.3 * scale * ud(rng));
        double fw = solve_f(ctx, w, f0);
        CHECK(std::abs(fw - f0) <= 5.0 / std::sqrt(12.0) * w.norm());
    }
}

TEST_CASE("neumann_N: size of N(0) and modified-average projection") {
    const OperatorContext& ctx = ctx12();
    const MatchingData& md = md12();
    double scale = std::pow(md.tau2, 2.5);
    double f0 = 0;
    BoundaryFunction N0 = neumann_N(ctx, BoundaryFunction::zero(md), 0.0, &f0);
    CHECK(N0.sup_value() <= 10.0 * scale);
    CHECK(std::abs(N0.cstar()) < 1e-12);
}

TEST_CASE("neumann_N linearization against the probed model") {
    // ||N(w) - N(0) - B w|| = O(tau2^3): fitted exponent across m
    std::vector<double> lx, ly;
    for (int m : {8, 12, 16}) {
        MatchingData md = solve_matching(build_config(m, 2));
        OperatorContext ctx(md);
        double scale = std::pow(md.tau2, 2.5);
        double f0 = 0;
        BoundaryFunction N0 = neumann_N(ctx, BoundaryFunction::zero(md), 0.0, &f0);
        BoundaryFunction w = BoundaryFunction::zero(md);
        w.set_mode(0, 2, scale);
        double fw = 0;
        BoundaryFunction Nw = neumann_N(ctx, w, f0, &fw);
        Eigen::VectorXd lin = ctx.zspace_coords(Nw) - ctx.zspace_coords(N0) -
                              ctx.bn_matrix() * ctx.osc_coords(w);
        double dev = lin.cwiseAbs().maxCoeff();
        lx.push_back(std::log(md.tau2));
        ly.push_back(std::log(std::max(dev, 1e-300)));
    }
    double n = lx.size(), sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sx += lx[i];
        sy += ly[i];
        sxx += lx[i] * lx[i];
        sxy += lx[i] * ly[i];
    }
    double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    CHECK(slope >= 2.7);
}

TEST_CASE("assembled phi_v is symmetric") {
    const OperatorContext& ctx = ctx12();
    const MatchingData& md = md12();
    BoundaryFunction v = small_w(md, 5e-5);
    Candidate c = assemble_phi_v(ctx, v);
    auto geo = ctx.geometry();
    auto phi_v = [&](const Vec3& p) {
        return varphi_eval(md, displace(geo, v, p)).first -
               c.xi.field.value(p) - c.xi_tilde.value(p);
    };
    double dev = check_symmetric(
        [&](const Vec3& p) {
            double d0 = dist_to_set(p, md.config.L0).first;
            double d2 = dist_to_set(p, md.config.L2).first;
            if (d0 < 1.05 * md.tau0 || d2 < 1.05 * md.tau2) return 0.0;
            return phi_v(p);
        },
        md.config, 50, 9);
    CHECK(dev < 1e-9);
}
