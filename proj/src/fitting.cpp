#include "rydsim/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "rydsim/constants.hpp"

namespace rydsim {

namespace {

constexpr double kForwardDiffEps = 1.49e-8; // sqrt(machine epsilon)

int find_param(const std::vector<std::string>& names, std::string_view name) {
    for (size_t i = 0; i < names.size(); ++i)
        if (names[i] == name)
            return static_cast<int>(i);
    throw ValidationError("FitResult: unknown parameter '" + std::string(name) + "'");
}

Eigen::VectorXd weights_from_errors(std::span<const double> yerr, size_t n) {
    Eigen::VectorXd w = Eigen::VectorXd::Ones(static_cast<int>(n));
    if (!yerr.empty()) {
        if (yerr.size() != n)
            throw ValidationError("fit: yerr length does not match data");
        for (size_t i = 0; i < n; ++i)
            w(static_cast<int>(i)) = yerr[i] > 0.0 ? 1.0 / yerr[i] : 1.0;
    }
    return w;
}

Eigen::VectorXd clamp_to_bounds(Eigen::VectorXd p, const CurveModel& model) {
    if (model.lower_bounds.size() == p.size())
        p = p.cwiseMax(model.lower_bounds);
    if (model.upper_bounds.size() == p.size())
        p = p.cwiseMin(model.upper_bounds);
    return p;
}

double weighted_cost(const CurveModel& model, std::span<const double> xs, std::span<const double> ys,
                     const Eigen::VectorXd& w, const Eigen::VectorXd& p) {
    double c = 0.0;
    for (size_t i = 0; i < xs.size(); ++i) {
        const double r = w(static_cast<int>(i)) * (ys[i] - model.evaluate(xs[i], p));
        c += r * r;
    }
    return c;
}

struct SingleFit {
    Eigen::VectorXd params;
    double cost = std::numeric_limits<double>::infinity();
    bool converged = false;
    int iterations = 0;
};

SingleFit levenberg_once(const CurveModel& model, std::span<const double> xs, std::span<const double> ys,
                         const Eigen::VectorXd& w, Eigen::VectorXd p, const FitOptions& opt) {
    const int n = static_cast<int>(xs.size());
    const int k = static_cast<int>(p.size());
    p = clamp_to_bounds(std::move(p), model);

    auto residuals = [&](const Eigen::VectorXd& q) {
        Eigen::VectorXd r(n);
        for (int i = 0; i < n; ++i)
            r(i) = w(i) * (ys[i] - model.evaluate(xs[i], q));
        return r;
    };

    SingleFit out;
    Eigen::VectorXd r = residuals(p);
    double cost = r.squaredNorm();
    double lambda = 1e-3;

    int iter = 0;
    for (; iter < opt.max_iterations; ++iter) {
        // Forward-difference Jacobian of the model (not of the residual sign).
        Eigen::MatrixXd j(n, k);
        for (int c = 0; c < k; ++c) {
            const double h = kForwardDiffEps * std::max(std::abs(p(c)), 1e-12);
            Eigen::VectorXd q = p;
            q(c) += h;
            for (int i = 0; i < n; ++i)
                j(i, c) = w(i) * (model.evaluate(xs[i], q) - (ys[i] - r(i) / w(i))) / h;
        }
        const Eigen::MatrixXd jtj = j.transpose() * j;
        const Eigen::VectorXd g = j.transpose() * r; // gradient of cost/2 w.r.t. params (sign-flipped)
        const double gscale = std::max(1.0, std::sqrt(cost));
        if (g.lpNorm<Eigen::Infinity>() < opt.gradient_tolerance * gscale) {
            out.converged = true;
            break;
        }

        bool stepped = false;
        for (int tries = 0; tries < 40; ++tries) {
            Eigen::MatrixXd a = jtj;
            for (int c = 0; c < k; ++c)
                a(c, c) += lambda * std::max(jtj(c, c), 1e-30);
            const Eigen::VectorXd delta = a.ldlt().solve(g);
            if (!delta.allFinite()) {
                lambda *= 4.0;
                continue;
            }
            const Eigen::VectorXd trial = clamp_to_bounds(p + delta, model);
            const double trial_cost = weighted_cost(model, xs, ys, w, trial);
            if (trial_cost <= cost) {
                const double rel_step = ((trial - p).cwiseQuotient(
                                             p.cwiseAbs().cwiseMax(Eigen::VectorXd::Constant(k, 1e-12))))
                                            .lpNorm<Eigen::Infinity>();
                p = trial;
                cost = trial_cost;
                r = residuals(p);
                lambda = std::max(lambda / 3.0, 1e-12);
                stepped = true;
                if (rel_step < opt.step_tolerance)
                    out.converged = true;
                break;
            }
            lambda *= 4.0;
        }
        if (!stepped) {
            // Damping saturated: treat the current point as stationary.
            out.converged = true;
            break;
        }
        if (out.converged)
            break;
    }
    out.params = p;
    out.cost = cost;
    out.iterations = iter + 1;
    return out;
}

FitResult finalize(const CurveModel& model, std::span<const double> xs, const Eigen::VectorXd& w,
                   const SingleFit& best) {
    const int n = static_cast<int>(xs.size());
    const int k = static_cast<int>(best.params.size());
    FitResult res;
    res.model = model.name;
    res.param_names = model.param_names;
    res.params = best.params;
    res.converged = best.converged;
    res.iterations = best.iterations;
    res.residual_norm = std::sqrt(best.cost);

    Eigen::MatrixXd j(n, k);
    for (int c = 0; c < k; ++c) {
        const double h = kForwardDiffEps * std::max(std::abs(best.params(c)), 1e-12);
        Eigen::VectorXd q = best.params;
        q(c) += h;
        for (int i = 0; i < n; ++i)
            j(i, c) = w(i) * (model.evaluate(xs[i], q) - model.evaluate(xs[i], best.params)) / h;
    }
    const Eigen::MatrixXd jtj = j.transpose() * j;
    const double dof = std::max(1, n - k);
    const double chi2_red = best.cost / dof;

    Eigen::FullPivLU<Eigen::MatrixXd> lu(jtj);
    if (lu.isInvertible()) {
        res.covariance = chi2_red * lu.inverse();
        res.sigmas = res.covariance.diagonal().cwiseMax(0.0).cwiseSqrt();
    } else {
        res.covariance = Eigen::MatrixXd::Zero(k, k);
        res.sigmas = Eigen::VectorXd::Zero(k);
        res.flags.push_back("singular_covariance");
    }

    if (model.lower_bounds.size() == k || model.upper_bounds.size() == k) {
        for (int c = 0; c < k; ++c) {
            const double scale = std::max(1e-12, std::abs(best.params(c)));
            const bool at_lower = model.lower_bounds.size() == k &&
                                  std::abs(best.params(c) - model.lower_bounds(c)) < 1e-9 * scale;
            const bool at_upper = model.upper_bounds.size() == k &&
                                  std::abs(best.params(c) - model.upper_bounds(c)) < 1e-9 * scale;
            if (at_lower || at_upper)
                res.flags.push_back("at_bound:" + model.param_names[c]);
        }
    }
    return res;
}

// Coarse periodogram over a uniform frequency grid; xs need not be uniform.
double dominant_frequency(std::span<const double> xs, std::span<const double> ys) {
    const double span = xs.back() - xs.front();
    if (span <= 0.0)
        return 0.0;
    const double mean = std::accumulate(ys.begin(), ys.end(), 0.0) / static_cast<double>(ys.size());
    const double fmax = 0.5 * static_cast<double>(xs.size() - 1) / span; // ~Nyquist for uniform grids
    const double fmin = 0.25 / span;
    const int n_candidates = 512;
    double best_f = fmin, best_power = -1.0;
    for (int c = 0; c < n_candidates; ++c) {
        const double f = fmin + (fmax - fmin) * c / (n_candidates - 1);
        double re = 0.0, im = 0.0;
        for (size_t i = 0; i < xs.size(); ++i) {
            const double arg = constants::two_pi * f * xs[i];
            re += (ys[i] - mean) * std::cos(arg);
            im += (ys[i] - mean) * std::sin(arg);
        }
        const double power = re * re + im * im;
        if (power > best_power) {
            best_power = power;
            best_f = f;
        }
    }
    return best_f;
}

void require_points(std::span<const double> xs, std::span<const double> ys, size_t minimum,
                    const char* what) {
    if (xs.size() != ys.size())
        throw ValidationError(std::string(what) + ": x/y length mismatch");
    if (xs.size() < minimum)
        throw ValidationError(std::string(what) + ": need at least " + std::to_string(minimum) + " points");
}

} // namespace

double FitResult::param(std::string_view name) const {
    return params(find_param(param_names, name));
}

double FitResult::sigma(std::string_view name) const {
    return sigmas(find_param(param_names, name));
}

bool FitResult::has_flag(std::string_view flag) const {
    return std::any_of(flags.begin(), flags.end(), [&](const auto& f) { return f == flag; });
}

FitResult fit_curve(std::span<const double> xs, std::span<const double> ys, std::span<const double> yerr,
                    const CurveModel& model, const std::vector<Eigen::VectorXd>& starts,
                    const FitOptions& options) {
    require_points(xs, ys, model.param_names.size(), model.name.c_str());
    if (starts.empty())
        throw ValidationError("fit_curve: no starting points supplied");
    const Eigen::VectorXd w = weights_from_errors(yerr, xs.size());

    SingleFit best;
    for (const auto& p0 : starts) {
        SingleFit trial = levenberg_once(model, xs, ys, w, p0, options);
        if (trial.cost < best.cost)
            best = trial;
    }
    if (!best.converged)
        throw NumericalError("fit '" + model.name + "' did not converge within " +
                             std::to_string(options.max_iterations) + " iterations");
    return finalize(model, xs, w, best);
}

Eigen::MatrixXd fit_jacobian(const CurveModel& model, std::span<const double> xs, const Eigen::VectorXd& p) {
    const int n = static_cast<int>(xs.size());
    const int k = static_cast<int>(p.size());
    Eigen::MatrixXd j(n, k);
    for (int c = 0; c < k; ++c) {
        const double h = kForwardDiffEps * std::max(std::abs(p(c)), 1e-12);
        Eigen::VectorXd q = p;
        q(c) += h;
        for (int i = 0; i < n; ++i)
            j(i, c) = (model.evaluate(xs[i], q) - model.evaluate(xs[i], p)) / h;
    }
    return j;
}

namespace {

struct DataStats {
    double mean, amplitude, span, ymin, ymax;
};

DataStats stats(std::span<const double> xs, std::span<const double> ys) {
    DataStats s{};
    s.ymin = *std::min_element(ys.begin(), ys.end());
    s.ymax = *std::max_element(ys.begin(), ys.end());
    s.mean = std::accumulate(ys.begin(), ys.end(), 0.0) / static_cast<double>(ys.size());
    s.amplitude = 0.5 * (s.ymax - s.ymin);
    s.span = xs.back() - xs.front();
    return s;
}

const double kInf = std::numeric_limits<double>::infinity();

} // namespace

FitResult fit_damped_cosine(std::span<const double> xs, std::span<const double> ys,
                            std::span<const double> yerr) {
    require_points(xs, ys, 8, "fit_damped_cosine");
    CurveModel model;
    model.name = "damped-cosine";
    model.param_names = {"A", "offset", "frequency", "phase", "tau"};
    model.evaluate = [](double t, const Eigen::VectorXd& p) {
        return p(1) + p(0) * std::exp(-t / p(4)) * std::cos(constants::two_pi * p(2) * t + p(3));
    };
    model.lower_bounds = Eigen::VectorXd(5);
    model.lower_bounds << -kInf, -kInf, 0.0, -kInf, 1e-300;
    model.upper_bounds = Eigen::VectorXd(5);
    model.upper_bounds << kInf, kInf, kInf, kInf, kInf;

    const DataStats st = stats(xs, ys);
    const double f0 = dominant_frequency(xs, ys);
    std::vector<Eigen::VectorXd> starts;
    for (double phase : {0.0, constants::pi / 2.0, constants::pi, 1.5 * constants::pi})
        for (double tau : {st.span, 0.3 * st.span}) {
            Eigen::VectorXd p(5);
            p << std::max(st.amplitude, 1e-12), st.mean, f0, phase, std::max(tau, 1e-12);
            starts.push_back(p);
        }
    FitResult res = fit_curve(xs, ys, yerr, model, starts);
    if (std::abs(res.param("A")) < 1e-3 * std::max(1.0, std::abs(res.param("offset"))))
        res.flags.push_back("tau_unidentifiable");
    return res;
}

FitResult fit_exponential_decay(std::span<const double> xs, std::span<const double> ys,
                                std::span<const double> yerr, std::optional<double> offset_fixed) {
    require_points(xs, ys, 4, "fit_exponential_decay");
    const DataStats st = stats(xs, ys);

    CurveModel model;
    model.name = "exponential-decay";
    if (offset_fixed) {
        const double b = *offset_fixed;
        model.param_names = {"A", "tau"};
        model.evaluate = [b](double t, const Eigen::VectorXd& p) { return b + p(0) * std::exp(-t / p(1)); };
    } else {
        model.param_names = {"A", "tau", "offset"};
        model.evaluate = [](double t, const Eigen::VectorXd& p) {
            return p(2) + p(0) * std::exp(-t / p(1));
        };
    }
    const int k = static_cast<int>(model.param_names.size());
    model.lower_bounds = Eigen::VectorXd::Constant(k, -kInf);
    model.upper_bounds = Eigen::VectorXd::Constant(k, kInf);
    model.lower_bounds(1) = 1e-300; // tau > 0

    std::vector<Eigen::VectorXd> starts;
    const double base = offset_fixed ? *offset_fixed : st.ymin;
    for (double tau : {st.span, 0.3 * st.span, 3.0 * st.span}) {
        Eigen::VectorXd p(k);
        if (offset_fixed)
            p << ys.front() - base, std::max(tau, 1e-12);
        else
            p << ys.front() - base, std::max(tau, 1e-12), base;
        starts.push_back(p);
    }
    FitResult res = fit_curve(xs, ys, yerr, model, starts);
    if (offset_fixed)
        res.flags.push_back("offset_fixed");
    return res;
}

double kuhr_envelope(double t, double t2_star) {
    const double x = t / t2_star;
    return std::pow(1.0 + 0.95 * x * x, -1.5);
}

double kuhr_phase_drag(double t, double t2_star) {
    return -3.0 * std::atan(0.97 * t / t2_star);
}

FitResult fit_ramsey_kuhr(std::span<const double> xs, std::span<const double> ys,
                          std::span<const double> yerr) {
    require_points(xs, ys, 12, "fit_ramsey_kuhr");
    CurveModel model;
    model.name = "ramsey-kuhr";
    model.param_names = {"A", "B", "delta_prime", "phi", "t2_star"};
    model.evaluate = [](double t, const Eigen::VectorXd& p) {
        const double t2 = p(4);
        return p(1) + kuhr_envelope(t, t2) * p(0) * std::cos(p(2) * t + kuhr_phase_drag(t, t2) + p(3));
    };
    const DataStats st = stats(xs, ys);
    model.lower_bounds = Eigen::VectorXd(5);
    model.lower_bounds << -kInf, -kInf, 0.0, -kInf, 1e-6 * st.span;
    model.upper_bounds = Eigen::VectorXd(5);
    model.upper_bounds << kInf, kInf, kInf, kInf, 1e6 * st.span;

    const double f0 = dominant_frequency(xs, ys);
    std::vector<Eigen::VectorXd> starts;
    for (double phase : {0.0, constants::pi / 2.0, constants::pi, 1.5 * constants::pi})
        for (double t2 : {st.span, 0.5 * st.span, 2.0 * st.span}) {
            Eigen::VectorXd p(5);
            p << std::max(st.amplitude, 1e-12), st.mean, constants::two_pi * f0, phase, t2;
            starts.push_back(p);
        }
    FitResult res = fit_curve(xs, ys, yerr, model, starts);
    if (res.has_flag("at_bound:t2_star"))
        res.flags.push_back("t2_star_at_bound");
    return res;
}

FitResult fit_gaussian_decay(std::span<const double> xs, std::span<const double> ys,
                             std::span<const double> yerr) {
    require_points(xs, ys, 4, "fit_gaussian_decay");
    CurveModel model;
    model.name = "gaussian-decay";
    model.param_names = {"A", "tau_g", "offset"};
    model.evaluate = [](double t, const Eigen::VectorXd& p) {
        const double x = t / p(1);
        return p(2) + p(0) * std::exp(-x * x);
    };
    model.lower_bounds = Eigen::VectorXd(3);
    model.lower_bounds << -kInf, 1e-300, -kInf;
    model.upper_bounds = Eigen::VectorXd::Constant(3, kInf);

    const DataStats st = stats(xs, ys);
    std::vector<Eigen::VectorXd> starts;
    for (double tau : {st.span, 0.5 * st.span, 2.0 * st.span}) {
        Eigen::VectorXd p(3);
        p << ys.front() - st.ymin, std::max(tau, 1e-12), st.ymin;
        starts.push_back(p);
    }
    return fit_curve(xs, ys, yerr, model, starts);
}

FitResult fit_parabola(std::span<const double> xs, std::span<const double> ys,
                       std::span<const double> yerr) {
    require_points(xs, ys, 3, "fit_parabola");
    const int n = static_cast<int>(xs.size());
    const Eigen::VectorXd w = weights_from_errors(yerr, xs.size());
    Eigen::MatrixXd a(n, 3);
    Eigen::VectorXd b(n);
    for (int i = 0; i < n; ++i) {
        a(i, 0) = w(i) * xs[i] * xs[i];
        a(i, 1) = w(i) * xs[i];
        a(i, 2) = w(i);
        b(i) = w(i) * ys[i];
    }
    const Eigen::VectorXd sol = a.colPivHouseholderQr().solve(b);

    FitResult res;
    res.model = "parabola";
    res.param_names = {"a", "b", "c"};
    res.params = sol;
    res.converged = true;
    res.iterations = 1;
    res.residual_norm = (a * sol - b).norm();
    const Eigen::MatrixXd ata = a.transpose() * a;
    const double dof = std::max(1, n - 3);
    const double chi2_red = res.residual_norm * res.residual_norm / dof;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(ata);
    if (lu.isInvertible()) {
        res.covariance = chi2_red * lu.inverse();
        res.sigmas = res.covariance.diagonal().cwiseMax(0.0).cwiseSqrt();
    } else {
        res.covariance = Eigen::MatrixXd::Zero(3, 3);
        res.sigmas = Eigen::VectorXd::Zero(3);
        res.flags.push_back("singular_covariance");
    }
    return res;
}

FitResult fit_cosine(std::span<const double> xs, std::span<const double> ys,
                     std::span<const double> yerr) {
    require_points(xs, ys, 8, "fit_cosine");
    CurveModel model;
    model.name = "cosine";
    model.param_names = {"A", "offset", "frequency", "phase"};
    model.evaluate = [](double t, const Eigen::VectorXd& p) {
        return p(1) + p(0) * std::cos(constants::two_pi * p(2) * t + p(3));
    };
    model.lower_bounds = Eigen::VectorXd(4);
    model.lower_bounds << -kInf, -kInf, 0.0, -kInf;
    model.upper_bounds = Eigen::VectorXd::Constant(4, kInf);

    const DataStats st = stats(xs, ys);
    const double f0 = dominant_frequency(xs, ys);
    std::vector<Eigen::VectorXd> starts;
    for (double phase : {0.0, constants::pi / 2.0, constants::pi, 1.5 * constants::pi}) {
        Eigen::VectorXd p(4);
        p << std::max(st.amplitude, 1e-12), st.mean, f0, phase;
        starts.push_back(p);
    }
    return fit_curve(xs, ys, yerr, model, starts);
}

FitResult fit_pi_train(std::span<const double> ns, std::span<const double> ys, double p1d,
                       std::span<const double> yerr) {
    require_points(ns, ys, 3, "fit_pi_train");
    CurveModel model;
    model.name = "pi-train";
    model.param_names = {"prd", "pre"};
    model.evaluate = [p1d](double n, const Eigen::VectorXd& p) {
        return p1d - p(0) * std::pow(p(1), n);
    };
    model.lower_bounds = Eigen::VectorXd(2);
    model.lower_bounds << 0.0, 0.0;
    model.upper_bounds = Eigen::VectorXd(2);
    model.upper_bounds << 1.0, 1.0;

    std::vector<Eigen::VectorXd> starts;
    for (double pre : {0.99, 0.95, 0.8}) {
        Eigen::VectorXd p(2);
        p << std::clamp(p1d - ys.front(), 0.01, 1.0), pre;
        starts.push_back(p);
    }
    return fit_curve(ns, ys, yerr, model, starts);
}

ContrastEstimate extract_contrast(std::span<const double> xs, std::span<const double> ys,
                                  std::span<const double> yerr) {
    require_points(xs, ys, 8, "extract_contrast");
    ContrastEstimate est;
    {
        const double ymax = *std::max_element(ys.begin(), ys.end());
        const double ymin = *std::min_element(ys.begin(), ys.end());
        if (ymax - ymin < 1e-12 * std::max(1.0, std::abs(ymax))) {
            est.value = 0.0;
            est.fallback = true;
            return est;
        }
    }
    try {
        const FitResult fit = fit_cosine(xs, ys, yerr);
        const double a = std::abs(fit.param("A"));
        const double b = fit.param("offset");
        if (b <= 0.0)
            throw NumericalError("extract_contrast: non-positive fitted offset");
        est.value = std::clamp(a / b, 0.0, 1.0);
        const double sa = fit.sigma("A");
        const double sb = fit.sigma("offset");
        est.sigma = est.value * std::sqrt(std::pow(sa / std::max(a, 1e-300), 2) + std::pow(sb / b, 2));
        if (a < 1e-12)
            est.sigma = sa / b;
    } catch (const std::exception&) {
        const double ymax = *std::max_element(ys.begin(), ys.end());
        const double ymin = *std::min_element(ys.begin(), ys.end());
        const double denom = ymax + ymin;
        est.value = denom > 0.0 ? std::clamp((ymax - ymin) / denom, 0.0, 1.0) : 0.0;
        est.sigma = 0.0;
        est.fallback = true;
    }
    return est;
}

} // namespace rydsim
