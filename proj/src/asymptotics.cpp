#include "ladder/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace ladder {

namespace {

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace

std::string AsymptoticReport::to_json() const {
    nlohmann::json j;
    j["theorem"] = theorem_id;
    j["model"] = model;
    j["note"] = note;
    j["tolerance"] = tolerance;
    j["pass"] = pass;
    j["calibration"] = calibration;
    nlohmann::json rows_json = nlohmann::json::array();
    for (const ReportRow& r : rows) {
        rows_json.push_back({{"n", r.n},
                             {"measured", r.measured},
                             {"predicted", r.predicted},
                             {"ratio", r.ratio},
                             {"ci_lo", r.ci_lo},
                             {"ci_hi", r.ci_hi}});
    }
    j["rows"] = rows_json;
    return j.dump(2);
}

std::string AsymptoticReport::to_table() const {
    std::ostringstream os;
    os << "theorem " << theorem_id << " on " << model << "  ["
       << (pass ? "PASS" : "FAIL") << ", tol " << tolerance << "]\n";
    if (!note.empty()) os << "  note: " << note << "\n";
    char buf[160];
    std::snprintf(buf, sizeof buf, "  %8s %16s %16s %12s %12s %12s\n", "n", "measured",
                  "predicted", "ratio", "ci_lo", "ci_hi");
    os << buf;
    for (const ReportRow& r : rows) {
        std::snprintf(buf, sizeof buf, "  %8ld %16.9g %16.9g %12.6g %12.6g %12.6g\n", r.n,
                      r.measured, r.predicted, r.ratio, r.ci_lo, r.ci_hi);
        os << buf;
    }
    return os.str();
}

std::string report_plot_csv(const AsymptoticReport& report) {
    std::string out = "n,measured,predicted,ratio,ci_lo,ci_hi\n";
    for (const ReportRow& r : report.rows) {
        out += std::to_string(r.n) + "," + fmt17(r.measured) + "," + fmt17(r.predicted) + "," +
               fmt17(r.ratio) + "," + fmt17(r.ci_lo) + "," + fmt17(r.ci_hi) + "\n";
    }
    return out;
}

double tolerance_schedule(long n, double base) {
    double f = n >= 2000 ? 1.0 : std::sqrt(2000.0 / static_cast<double>(n));
    return base * f;
}

CalibrationConstants calibrate_g0(const IncrementModel& model, long n) {
    if (model.period_at_zero() != 1)
        throw std::invalid_argument("calibrate_g0: model is periodic at 0");
    SignSequence s = sign_sequence_exact(model, n);
    double c_n = normalizing_sequence(model, n);
    CalibrationConstants c;
    c.g0_hat = c_n * s.eq_zero[n] / model.span();
    c.cn_scale = 1.0;
    c.provenance = "unconditioned local limit at n=" + std::to_string(n);
    if (!(c.g0_hat > 0)) throw std::runtime_error("calibrate_g0: vanishing local probability");
    return c;
}

namespace {

// Shared reduced-form check r_n = n pmf(n)/survival(n) -> target.
AsymptoticReport local_law(const LadderPmf& pmf, double target, std::vector<long> grid,
                           const std::string& id) {
    AsymptoticReport rep;
    rep.theorem_id = id;
    double base = pmf.source == SignSource::MonteCarlo ? 0.10 : 0.02;

    long N = pmf.pmf.order();
    std::vector<long> usable;
    double survival_floor = 1e-12;
    double run = 1.0;
    std::vector<double> surv(N + 1, 0.0);
    for (long k = 0; k <= N; ++k) {
        run -= pmf.pmf[k];
        surv[k] = run;
    }
    for (long n : grid) {
        if (n >= 1 && n <= N && surv[n] > survival_floor) usable.push_back(n);
    }
    if (usable.size() < grid.size())
        rep.note = "grid shrunk: insufficient series order or tail mass";
    if (usable.empty()) {
        rep.pass = false;
        rep.tolerance = base;
        rep.note = "no usable grid points";
        return rep;
    }

    for (long n : usable) {
        ReportRow row;
        row.n = n;
        row.measured = static_cast<double>(n) * pmf.pmf[n] / surv[n];
        row.predicted = target;
        row.ratio = row.measured / target;
        if (!pmf.error_bound.empty()) {
            double err_pmf = pmf.error_bound[n];
            double err_surv = 0.0;
            for (long k = 1; k <= n; ++k) err_surv += pmf.error_bound[k];
            double dr = static_cast<double>(n) * err_pmf / surv[n] +
                        row.measured * err_surv / surv[n];
            row.ci_lo = row.measured - dr;
            row.ci_hi = row.measured + dr;
        } else {
            row.ci_lo = row.ci_hi = row.measured;
        }
        rep.rows.push_back(row);
    }
    long n_last = usable.back();
    rep.tolerance = tolerance_schedule(n_last, base);
    double r = rep.rows.back().ratio;
    rep.pass = std::abs(r - 1.0) <= rep.tolerance;
    return rep;
}

} // namespace

AsymptoticReport verify_local_law_minus(const LadderPmf& tau_minus, double rho,
                                        std::vector<long> grid) {
    AsymptoticReport rep = local_law(tau_minus, 1.0 - rho, std::move(grid), "main");
    rep.calibration["rho"] = rho;
    return rep;
}

AsymptoticReport verify_local_law_plus(const LadderPmf& tau_plus, double rho,
                                       std::vector<long> grid) {
    AsymptoticReport rep = local_law(tau_plus, rho, std::move(grid), "main-prime");
    rep.calibration["rho"] = rho;
    return rep;
}

AsymptoticReport verify_omega_ratio(const PowerSeries& t_minus, const PowerSeries& tau_minus,
                                    const OmegaTotal& omega_sum, std::vector<long> grid) {
    if (!omega_sum.converged)
        throw std::runtime_error("verify_omega_ratio: Omega(1) not converged to tolerance (" +
                                 std::to_string(omega_sum.instability) + "); extend K");
    AsymptoticReport rep;
    rep.theorem_id = "omega-ratio";
    rep.tolerance = 0.05;
    rep.calibration["omega_total"] = omega_sum.value;
    rep.calibration["omega_remainder"] = omega_sum.remainder;

    long N = std::min(t_minus.order(), tau_minus.order());
    std::vector<long> usable;
    for (long n : grid)
        if (n >= 1 && n <= N && tau_minus[n] > 1e-300) usable.push_back(n);
    if (usable.empty()) {
        rep.pass = false;
        rep.note = "no usable grid points (pmf vanishes on grid)";
        return rep;
    }
    for (long n : usable) {
        ReportRow row;
        row.n = n;
        row.measured = t_minus[n] / tau_minus[n];
        row.predicted = omega_sum.value;
        row.ratio = row.measured / row.predicted;
        row.ci_lo = row.ci_hi = row.measured;
        rep.rows.push_back(row);
    }
    rep.pass = std::abs(rep.rows.back().ratio - 1.0) <= rep.tolerance;
    return rep;
}

AsymptoticReport verify_small_deviations(const IncrementModel& model, long n, long j_hi,
                                         double tol) {
    if (model.period_at_zero() != 1)
        throw std::invalid_argument(
            "verify_small_deviations: model is periodic at 0 (local limit inapplicable)");

    AsymptoticReport rep;
    rep.theorem_id = "small-dev";
    rep.model = model.describe();
    rep.tolerance = tol;

    RenewalTable renewal = renewal_function(model, j_hi, 2048);
    if (renewal.remainder_bound > 1e-6 * renewal.H[renewal.x_max()])
        throw std::runtime_error("verify_small_deviations: H truncation remainder too large (" +
                                 std::to_string(renewal.remainder_bound) + ")");

    KilledWalkOptions opts;
    KilledWalkTable kt = killed_walk(model, n, opts);
    CalibrationConstants calib = calibrate_g0(model, n);
    double c_n = normalizing_sequence(model, n);
    double h = model.span();

    double lo = 0.0, hi = 0.0;
    for (long j = 1; j <= j_hi; ++j) {
        double rho_j = static_cast<double>(n) * c_n * kt.b(n, j) / (h * renewal.H[j - 1]);
        ReportRow row;
        row.n = j;
        row.measured = rho_j;
        row.predicted = calib.g0_hat;
        row.ratio = rho_j / calib.g0_hat;
        row.ci_lo = row.ci_hi = rho_j;
        rep.rows.push_back(row);
        if (j == 1) lo = hi = rho_j;
        lo = std::min(lo, rho_j);
        hi = std::max(hi, rho_j);
    }
    rep.calibration["g0_hat"] = calib.g0_hat;
    rep.calibration["c_n"] = c_n;
    rep.calibration["flatness"] = hi / lo;
    double worst_match = 0.0;
    for (const ReportRow& r : rep.rows)
        worst_match = std::max(worst_match, std::abs(r.ratio - 1.0));
    rep.calibration["worst_match"] = worst_match;
    rep.pass = (hi / lo <= 1.0 + tol) && (worst_match <= tol);
    rep.note = "rows are indexed by lattice site j, not by n; n = " + std::to_string(n);
    return rep;
}

AsymptoticReport verify_renewal_asymptotics(const RenewalTable& renewal,
                                            const IncrementModel& model) {
    AsymptoticReport rep;
    rep.theorem_id = "renewal";
    rep.model = model.describe();
    rep.tolerance = 0.1;

    long x_max = renewal.x_max();
    if (x_max < 100)
        throw std::invalid_argument("verify_renewal_asymptotics: insufficient range (need "
                                    "two decades, x_max >= 100)");

    double alpha_rho = model.alpha() * rho_index(model.alpha(), model.beta());
    double target = alpha_rho < 1.0 - 1e-9 ? alpha_rho : 1.0;

    // Least-squares slope of log H against log x on a log-spaced grid.
    long x_lo = x_max / 100;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    long count = 0;
    for (int i = 0; i <= 50; ++i) {
        double lx = std::log(static_cast<double>(x_lo)) +
                    (std::log(static_cast<double>(x_max)) - std::log(static_cast<double>(x_lo))) *
                        i / 50.0;
        long x = std::lround(std::exp(lx));
        x = std::clamp(x, x_lo, x_max);
        double ly = std::log(renewal.H[x]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++count;
        if (i % 10 == 0) {
            ReportRow row;
            row.n = x;
            row.measured = renewal.H[x];
            row.predicted = std::pow(static_cast<double>(x), target);
            row.ratio = row.measured / row.predicted;
            row.ci_lo = row.ci_hi = row.measured;
            rep.rows.push_back(row);
        }
    }
    double slope = (count * sxy - sx * sy) / (count * sxx - sx * sx);
    rep.calibration["slope"] = slope;
    rep.calibration["target"] = target;
    rep.calibration["alpha_rho"] = alpha_rho;
    rep.calibration["remainder_bound"] = renewal.remainder_bound;

    // l3(x) = 1 / int_0^x P(chi+ > y) dy, closed form when chi+ is known.
    if (!renewal.chi_pmf.empty()) {
        double chi_tail_int = 0.0;
        double suffix = renewal.chi_total;
        long chi_max = static_cast<long>(renewal.chi_pmf.size()) - 1;
        for (long y = 0; y < std::min(x_max, chi_max + 1); ++y) {
            chi_tail_int += suffix * renewal.span;
            if (y + 1 <= chi_max) suffix -= renewal.chi_pmf[y + 1];
        }
        if (chi_tail_int > 0) rep.calibration["l3_xmax"] = 1.0 / chi_tail_int;
    }

    rep.pass = std::abs(slope - target) <= rep.tolerance;
    return rep;
}

AsymptoticReport spitzer_doney_diagnostic(const SignSequence& signs, double rho,
                                          std::vector<long> grid) {
    AsymptoticReport rep;
    rep.theorem_id = "spitzer";
    rep.tolerance = signs.source == SignSource::MonteCarlo ? 0.05 : 0.02;
    rep.note = "measured = Cesaro mean of P(S_k > 0), k <= n; pointwise values in calibration";

    long N = signs.order();
    double run = 0.0;
    std::vector<double> cesaro(N + 1, 0.0);
    for (long k = 1; k <= N; ++k) {
        run += signs.gt_zero[k];
        cesaro[k] = run / static_cast<double>(k);
    }
    std::vector<long> usable;
    for (long n : grid)
        if (n >= 1 && n <= N) usable.push_back(n);
    if (usable.empty()) {
        rep.pass = false;
        rep.note = "no usable grid points";
        return rep;
    }
    for (long n : usable) {
        ReportRow row;
        row.n = n;
        row.measured = cesaro[n];
        row.predicted = rho;
        row.ratio = row.measured / rho;
        if (signs.source == SignSource::MonteCarlo) {
            row.ci_lo = row.measured - 1.96 * signs.stderr_gt[n];
            row.ci_hi = row.measured + 1.96 * signs.stderr_gt[n];
        } else {
            row.ci_lo = row.ci_hi = row.measured;
        }
        rep.rows.push_back(row);
        rep.calibration["pointwise_" + std::to_string(n)] = signs.gt_zero[n];
    }
    rep.pass = std::abs(rep.rows.back().measured - rho) <= rep.tolerance;
    return rep;
}

} // namespace ladder
