#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rydsim/errors.hpp"

namespace rydsim {

struct FitResult {
    std::string model;
    std::vector<std::string> param_names;
    Eigen::VectorXd params;
    Eigen::VectorXd sigmas;
    Eigen::MatrixXd covariance;
    double residual_norm = 0.0; // sqrt(sum of squared weighted residuals)
    bool converged = false;
    int iterations = 0;
    std::vector<std::string> flags;

    double param(std::string_view name) const;
    double sigma(std::string_view name) const;
    bool has_flag(std::string_view flag) const;
};

/// Scalar curve model y = f(x; p) fitted by damped Gauss-Newton.
struct CurveModel {
    std::string name;
    std::vector<std::string> param_names;
    std::function<double(double, const Eigen::VectorXd&)> evaluate;
    Eigen::VectorXd lower_bounds; // empty = unbounded
    Eigen::VectorXd upper_bounds;
};

struct FitOptions {
    int max_iterations = 500;
    double step_tolerance = 1e-10;     // relative parameter step
    double gradient_tolerance = 1e-12; // scaled gradient infinity norm
};

/// Weighted nonlinear least squares with Levenberg-style damping and a
/// forward-difference numeric Jacobian. Multiple starts are tried and the
/// best (lowest residual) converged result wins.
FitResult fit_curve(std::span<const double> xs, std::span<const double> ys, std::span<const double> yerr,
                    const CurveModel& model, const std::vector<Eigen::VectorXd>& starts,
                    const FitOptions& options = {});

/// Numeric Jacobian as used by the optimizer (forward differences).
Eigen::MatrixXd fit_jacobian(const CurveModel& model, std::span<const double> xs, const Eigen::VectorXd& p);

// --- the curve models of the analysis pipeline -----------------------------

/// y = offset + A exp(-t/tau) cos(2 pi f t + phi); params {A, offset, frequency, phase, tau}.
FitResult fit_damped_cosine(std::span<const double> xs, std::span<const double> ys,
                            std::span<const double> yerr = {});

/// y = offset + A exp(-t/tau); params {A, tau, offset}. The offset can be
/// frozen (the spin-echo and control-fringe analyses use 0.5 and 0).
FitResult fit_exponential_decay(std::span<const double> xs, std::span<const double> ys,
                                std::span<const double> yerr = {},
                                std::optional<double> offset_fixed = std::nullopt);

/// Ramsey fringe with algebraic envelope and phase drag:
/// y = B + alpha(t) A cos(delta' t + kappa(t) + phi),
/// alpha = [1 + 0.95 (t/T2*)^2]^(-3/2), kappa = -3 atan(0.97 t / T2*).
/// Params {A, B, delta_prime, phi, t2_star}.
FitResult fit_ramsey_kuhr(std::span<const double> xs, std::span<const double> ys,
                          std::span<const double> yerr = {});

double kuhr_envelope(double t, double t2_star);
double kuhr_phase_drag(double t, double t2_star);

/// y = offset + A exp(-(t/tau_g)^2); params {A, tau_g, offset}.
FitResult fit_gaussian_decay(std::span<const double> xs, std::span<const double> ys,
                             std::span<const double> yerr = {});

/// y = a x^2 + b x + c by linear least squares (closed form).
FitResult fit_parabola(std::span<const double> xs, std::span<const double> ys,
                       std::span<const double> yerr = {});

/// y = offset + A cos(2 pi f t + phi); params {A, offset, frequency, phase}.
FitResult fit_cosine(std::span<const double> xs, std::span<const double> ys,
                     std::span<const double> yerr = {});

/// Survival of the pi-pulse-train calibration, P(n) = p1d - prd * pre^n with
/// p1d held fixed; params {prd, pre}.
FitResult fit_pi_train(std::span<const double> ns, std::span<const double> ys, double p1d,
                       std::span<const double> yerr = {});

struct ContrastEstimate {
    double value = 0.0;
    double sigma = 0.0;
    bool fallback = false; // min-max estimate after a failed cosine fit
};

/// Fringe contrast: amplitude of a fitted plain cosine normalized by its
/// offset, clamped to [0, 1]; falls back to (max-min)/(max+min).
ContrastEstimate extract_contrast(std::span<const double> xs, std::span<const double> ys,
                                  std::span<const double> yerr = {});

} // namespace rydsim
