#include <doctest.h>

#include <cmath>

#include "ladder/asymptotics.hpp"
#include "ladder/montecarlo.hpp"
#include "oracles.hpp"

using namespace ladder;

namespace {

LadderPmf lazy_tau_minus(long N) {
    SignSequence s = sign_sequence_exact(oracles::lazy_walk(), N);
    return tau_minus_pmf(s, N);
}

} // namespace

TEST_CASE("tolerance schedule is nonincreasing") {
    double prev = 1e9;
    for (long n : {100L, 250L, 500L, 1000L, 2000L, 4000L}) {
        double t = tolerance_schedule(n, 0.02);
        CHECK(t <= prev);
        prev = t;
    }
    CHECK(tolerance_schedule(2000, 0.02) == 0.02);
    CHECK(tolerance_schedule(4000, 0.02) == 0.02);
}

TEST_CASE("local law minus on the lazy walk") {
    long N = 2048;
    LadderPmf tm = lazy_tau_minus(N);
    AsymptoticReport rep = verify_local_law_minus(tm, 0.5, {250, 500, 1000, 2000});
    CHECK(rep.pass);
    CHECK(rep.rows.size() == 4);
    const ReportRow& last = rep.rows.back();
    CHECK(last.n == 2000);
    CHECK(std::abs(last.ratio - 1.0) <= 0.02);
    for (const ReportRow& r : rep.rows) CHECK(r.ratio == r.measured / r.predicted);

    SUBCASE("grid refinement never flips pass to fail") {
        AsymptoticReport coarse = verify_local_law_minus(tm, 0.5, {250, 500});
        CHECK(coarse.pass);
        AsymptoticReport fine = verify_local_law_minus(tm, 0.5, {250, 500, 1000, 2000});
        CHECK(fine.pass);
    }

    SUBCASE("grid shrinks with a warning beyond the series order") {
        AsymptoticReport rep2 = verify_local_law_minus(tm, 0.5, {250, 4000});
        CHECK(rep2.rows.size() == 1);
        CHECK(rep2.note.find("shrunk") != std::string::npos);
    }
}

TEST_CASE("local law plus mirrors minus") {
    long N = 2048;
    SignSequence s = sign_sequence_exact(oracles::lazy_walk(), N);
    LadderPmf tp = tau_plus_pmf(s, N);
    AsymptoticReport rep = verify_local_law_plus(tp, 0.5, {250, 500, 1000, 2000});
    CHECK(rep.pass);
    CHECK(std::abs(rep.rows.back().ratio - 1.0) <= 0.02);
}

TEST_CASE("periodic tau support of the +-1 walk doubles the local ratio") {
    // tau- of the simple walk lives on {1, 2, 4, 6, ...}: at even n the local
    // mass is twice the smooth profile, so the reduced ratio converges to
    // 2 (1 - rho), not (1 - rho). This documents why the aperiodic lazy walk
    // is the default model for local-limit checks.
    long N = 2048;
    SignSequence s = sign_sequence_exact(oracles::simple_walk(), N);
    LadderPmf tm = tau_minus_pmf(s, N);
    AsymptoticReport rep = verify_local_law_minus(tm, 0.5, {2000});
    CHECK(rep.rows.back().ratio == doctest::Approx(2.0).epsilon(0.01));
    CHECK_FALSE(rep.pass);
    // And the strict ascending epoch lives on odd n only.
    LadderPmf tp = tau_plus_pmf(s, N);
    CHECK(tp.pmf[2000] == doctest::Approx(0.0));
    CHECK(tp.pmf[2001] > 0.0);
}

TEST_CASE("sign-flip duality") {
    SUBCASE("lattice: tau+ equals the strict descending epoch of the mirror") {
        IncrementModel m = IncrementModel::finite_lattice({0.125, 0.0, 0.625, 0.25}, -2);
        std::vector<double> rev(m.lattice_pmf().rbegin(), m.lattice_pmf().rend());
        IncrementModel mirror = IncrementModel::finite_lattice(rev, -m.k_max());

        long N = 128;
        SignSequence sm = sign_sequence_exact(m, N);
        SignSequence smir = sign_sequence_exact(mirror, N);
        LadderPmf tau_plus_direct = tau_plus_pmf(sm, N);
        LadderPmf tau_minus_mirror = tau_minus_pmf(smir, N);
        PowerSeries t_minus_mirror = t_minus_pmf(tau_minus_mirror, omega_series(smir, N));
        for (long n = 1; n <= N; ++n)
            CHECK(tau_plus_direct.pmf[n] == doctest::Approx(t_minus_mirror[n]).epsilon(1e-11));
    }

    SUBCASE("atomless: report-for-report equality") {
        long N = 64;
        SignSequence s;
        s.source = SignSource::Analytic;
        s.le_zero.assign(N + 1, 0.0);
        s.gt_zero.assign(N + 1, 0.0);
        s.eq_zero.assign(N + 1, 0.0);
        RngStream rng(8);
        for (long n = 1; n <= N; ++n) {
            double p = 0.4 + 0.2 * rng.next_unit();
            s.gt_zero[n] = p;
            s.le_zero[n] = 1.0 - p;
        }
        SignSequence mirror = s;
        std::swap(mirror.le_zero, mirror.gt_zero);

        double rho = 0.5;
        AsymptoticReport plus = verify_local_law_plus(tau_plus_pmf(s, N), rho, {16, 32, 64});
        AsymptoticReport minus =
            verify_local_law_minus(tau_minus_pmf(mirror, N), 1.0 - rho, {16, 32, 64});
        REQUIRE(plus.rows.size() == minus.rows.size());
        for (size_t i = 0; i < plus.rows.size(); ++i) {
            CHECK(plus.rows[i].measured == minus.rows[i].measured);
            CHECK(plus.rows[i].predicted == minus.rows[i].predicted);
        }
        CHECK(plus.pass == minus.pass);
    }
}

TEST_CASE("omega ratio on the lazy walk") {
    long N = 2048;
    SignSequence s = sign_sequence_exact(oracles::lazy_walk(), N);
    LadderPmf tm = tau_minus_pmf(s, N);
    PowerSeries omega = omega_series(s, N);
    PowerSeries t = t_minus_pmf(tm, omega);
    SignSequence s4 = sign_sequence_exact(oracles::lazy_walk(), 4096);
    OmegaTotal total = omega_total(omega_series(s4, 4096));
    AsymptoticReport rep = verify_omega_ratio(t, tm.pmf, total, {250, 500, 1000, 2000});
    CHECK(rep.pass);
    CHECK(std::abs(rep.rows.back().ratio - 1.0) <= 0.05);

    SUBCASE("unconverged omega total is an error") {
        OmegaTotal bad = total;
        bad.converged = false;
        CHECK_THROWS(verify_omega_ratio(t, tm.pmf, bad, {250}));
    }

    SUBCASE("continuous models have ratio exactly 1") {
        long M = 32;
        SignSequence c;
        c.source = SignSource::Analytic;
        c.le_zero.assign(M + 1, 0.5);
        c.gt_zero.assign(M + 1, 0.5);
        c.eq_zero.assign(M + 1, 0.0);
        LadderPmf ctm = tau_minus_pmf(c, M);
        PowerSeries co = omega_series(c, M);
        OmegaTotal ct = omega_total(co);
        AsymptoticReport crep = verify_omega_ratio(t_minus_pmf(ctm, co), ctm.pmf, ct, {8, 16, 32});
        CHECK(crep.pass);
        for (const ReportRow& r : crep.rows) CHECK(r.measured == doctest::Approx(1.0));
    }
}

TEST_CASE("small deviations guard and diagnostics") {
    CHECK_THROWS(verify_small_deviations(oracles::simple_walk(), 512));

    AsymptoticReport rep = verify_small_deviations(oracles::lazy_walk(), 512);
    REQUIRE(rep.rows.size() == 10);
    CHECK(rep.calibration.count("g0_hat") == 1);
    CHECK(rep.calibration.at("flatness") >= 1.0);
    // g0_hat = c_n P(S_n = 0)/h -> 1/sqrt(2 pi), the standardized local value.
    double g0 = rep.calibration.at("g0_hat");
    CHECK(g0 == doctest::Approx(1.0 / std::sqrt(2.0 * M_PI)).epsilon(0.01));
    for (const ReportRow& r : rep.rows) CHECK(r.measured > 0.0);
    // The residual j-profile is the unconditioned Gaussian window: max/min
    // over j in [1,10] approaches exp((10^2 - 1)/(2 n Var)).
    CHECK(rep.calibration.at("flatness") ==
          doctest::Approx(std::exp(99.0 / 512.0)).epsilon(0.01));
}

TEST_CASE("calibration consistency between n and 2n") {
    CalibrationConstants a = calibrate_g0(oracles::lazy_walk(), 1000);
    CalibrationConstants b = calibrate_g0(oracles::lazy_walk(), 2000);
    CHECK(std::abs(a.g0_hat / b.g0_hat - 1.0) <= 0.03);
    CHECK(a.provenance.find("1000") != std::string::npos);
}

TEST_CASE("renewal asymptotics") {
    SUBCASE("simple walk: slope 1 and l3 = 1") {
        RenewalTable rt = renewal_function(oracles::simple_walk(), 200, 512);
        AsymptoticReport rep = verify_renewal_asymptotics(rt, oracles::simple_walk());
        CHECK(rep.pass);
        CHECK(rep.calibration.at("target") == 1.0);
        CHECK(std::abs(rep.calibration.at("slope") - 1.0) <= 0.1);
        CHECK(rep.calibration.at("l3_xmax") == doctest::Approx(1.0).epsilon(1e-9));
    }

    SUBCASE("insufficient range fails") {
        RenewalTable rt = renewal_function(oracles::simple_walk(), 50, 128);
        CHECK_THROWS(verify_renewal_asymptotics(rt, oracles::simple_walk()));
    }

    SUBCASE("heavy-tailed lattice pareto: slope alpha*rho = 0.25") {
        IncrementModel m = IncrementModel::lattice_pareto(0.5, 0.5, 0.5);
        RenewalTable rt = renewal_function(m, 10000, 512);
        AsymptoticReport rep = verify_renewal_asymptotics(rt, m);
        CHECK(rep.calibration.at("target") == doctest::Approx(0.25));
        CHECK(rep.pass);
    }
}

TEST_CASE("spitzer diagnostic") {
    SUBCASE("lazy walk: symmetric-walk identity and Cesaro convergence") {
        long N = 2000;
        SignSequence s = sign_sequence_exact(oracles::lazy_walk(), N);
        for (long n : {1L, 10L, 100L, 2000L})
            CHECK(std::abs(s.gt_zero[n] - 0.5) ==
                  doctest::Approx(s.eq_zero[n] / 2.0).epsilon(1e-10));
        AsymptoticReport rep = spitzer_doney_diagnostic(s, 0.5, {250, 500, 1000, 2000});
        CHECK(rep.pass);
        CHECK(rep.calibration.count("pointwise_2000") == 1);
    }

    SUBCASE("spectrally positive pareto via MC signs") {
        IncrementModel m = IncrementModel::two_sided_pareto(1.5, 1.0, 0.0);
        SignSequence s = sign_probabilities_mc(m, 2000, 20000, SeedPlan{123, 8});
        AsymptoticReport rep = spitzer_doney_diagnostic(s, 1.0 / 3.0, {500, 1000, 2000});
        CHECK(std::abs(rep.rows.back().measured - 1.0 / 3.0) <= 0.05);
        CHECK(rep.pass);
    }
}

TEST_CASE("report rendering") {
    AsymptoticReport rep;
    rep.theorem_id = "main";
    rep.model = "test";
    rep.tolerance = 0.02;

    SUBCASE("empty report renders header-only plot csv") {
        CHECK(report_plot_csv(rep) == "n,measured,predicted,ratio,ci_lo,ci_hi\n");
    }

    rep.rows.push_back({100, 0.5, 0.5, 1.0, 0.49, 0.51});
    rep.rows.push_back({200, 0.25, 0.25, 1.0, 0.24, 0.26});
    rep.pass = true;

    SUBCASE("row count matches and re-emission is byte-identical") {
        std::string a = report_plot_csv(rep);
        std::string b = report_plot_csv(rep);
        CHECK(a == b);
        size_t lines = std::count(a.begin(), a.end(), '\n');
        CHECK(lines == rep.rows.size() + 1);
    }

    SUBCASE("json and table contain the verdict") {
        CHECK(rep.to_json().find("\"pass\": true") != std::string::npos);
        CHECK(rep.to_table().find("PASS") != std::string::npos);
    }
}
