#pragma once

#include "ctmc/generator.hpp"

#include <Eigen/Dense>

#include <optional>
#include <span>
#include <string>

namespace ctmc {

enum class ExpmMethod { pade, uniformization, automatic };

std::string to_string(ExpmMethod m);
ExpmMethod parse_expm_method(const std::string& s);

struct ExpmConfig {
    ExpmMethod method = ExpmMethod::automatic;
    double tol = 1e-12;             // Poisson tail left out of the uniformization series
    std::size_t max_terms = 200000; // uniformization series cap
};

/// exp(A) by scaling and squaring with diagonal Pade approximants (degree up
/// to 13). exp(0) is the identity exactly. Throws ValidationError on
/// non-finite input.
Eigen::MatrixXd expm(const Eigen::MatrixXd& a);

struct ActionResult {
    Eigen::MatrixXd values;
    ExpmMethod method = ExpmMethod::pade;  // method actually used
    std::optional<std::string> warning;
};

/// exp(t A) V for a block of column vectors V.
ActionResult expm_action(const Eigen::MatrixXd& a, double t, const Eigen::MatrixXd& v,
                         const ExpmConfig& cfg = {});

/// exp(t Lambda) phi for a generator of any kind.
Eigen::VectorXd expm_action(const GeneratorMatrix& lambda, double t, const Eigen::VectorXd& phi,
                            const ExpmConfig& cfg = {}, std::string* warning = nullptr);

/// Uniformization series for exp(t A) V; requires nonnegative off-diagonals.
/// Returns nullopt when more than cfg.max_terms terms would be needed.
std::optional<Eigen::MatrixXd> uniformization_action(const Eigen::MatrixXd& a, double t,
                                                     const Eigen::MatrixXd& v, const ExpmConfig& cfg);

/// exp(t A) V via the Pade route, squaring only as far as pays off against
/// repeated application of the scaled exponential to V.
Eigen::MatrixXd pade_action(const Eigen::MatrixXd& a, double t, const Eigen::MatrixXd& v);

struct ScheduleFactor {
    double duration = 0.0;
    const GeneratorMatrix* generator = nullptr;
};

/// exp(dt_1 L_1) exp(dt_2 L_2) ... exp(dt_n L_n) phi, applied right to left.
Eigen::VectorXd expm_product_action(std::span<const ScheduleFactor> schedule, const Eigen::VectorXd& phi,
                                    const ExpmConfig& cfg = {}, std::string* warning = nullptr);

}  // namespace ctmc
