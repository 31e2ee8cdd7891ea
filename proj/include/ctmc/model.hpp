#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>

namespace ctmc {

/// Jump-activity regime of a jump density near a jump size of zero.
///   O  - bounded jump variation (compound Poisson, stable-like with alpha < 1)
///   I  - stable-like with alpha = 1
///   II - stable-like with alpha in (1, 2)
enum class JumpCase { O, I, II, Unclassified };

std::string to_string(JumpCase c);

/// Bounds kappa_lo / |y|^(1+alpha) <= g(x, y) <= kappa_hi / |y|^(1+alpha)
/// on each side of zero.
struct StableShape {
    double alpha_plus = 0.0;
    double alpha_minus = 0.0;
    double kappa_hi_plus = 0.0;
    double kappa_lo_plus = 0.0;
    double kappa_hi_minus = 0.0;
    double kappa_lo_minus = 0.0;
};

struct CaseInfo {
    JumpCase kind = JumpCase::O;
    std::optional<StableShape> stable;
};

/// State-dependent jump density g(x, y) on relative jump sizes y in (-1, inf).
class JumpDensity {
public:
    virtual ~JumpDensity() = default;

    virtual double density(double x, double y) const = 0;

    /// Integral of |y|^p g(x, y) over [a, b], with -1 <= a <= b <= +inf and
    /// p in {0, 1, 2}. The default splits at y = 0 and uses adaptive quadrature.
    virtual double cell_moment(double x, double a, double b, int p) const;

    /// Zeroth moments of consecutive cells [edges[j], edges[j+1]].
    virtual void cell_masses(double x, std::span<const double> edges, std::span<double> out) const;

    /// Integral of y^2 g(x, y) over (-1, inf).
    virtual double second_moment(double x) const;

    /// Regime known analytically; nullopt means "probe numerically".
    virtual std::optional<CaseInfo> declared_case(double lower, double upper) const;
};

/// Drift, local volatility and jump density of a one-dimensional Markov price
/// model. Jumps are compensated by the generator builders, so `gamma` is the
/// total risk-neutral drift rate r - d.
struct ModelSpec {
    std::string name;
    double gamma = 0.0;
    std::function<double(double)> sigma;
    std::shared_ptr<const JumpDensity> jumps;

    bool has_jumps() const { return static_cast<bool>(jumps); }
    /// sigma(x)^2 x^2, evaluated so that x = 0 is finite for CEV-type sigma.
    double local_variance(double x) const;
};

struct KouLocalLevyParams {
    double S0 = 100.0;
    double sigma0 = 0.2;
    double lambda = 0.0;
    double p = 0.5;
    double eta1 = 50.0;
    double eta2 = 25.0;
    double beta = 0.0;
    double r = 0.0;
    double d = 0.0;
};

struct CgmyParams {
    double C = 1.0;
    double G = 1.0;
    double M = 3.0;
    double Y = 0.5;
    double r = 0.0;
    double d = 0.0;
    double sigma_extra = 0.0;
};

ModelSpec gbm(double sigma0, double r, double d);

/// CEV-type local volatility sigma(x) = sigma0 (x / reference)^beta.
ModelSpec local_vol(double sigma0, double beta, double reference, double r, double d);

ModelSpec kou_local_levy(const KouLocalLevyParams& p);

ModelSpec cgmy(const CgmyParams& p);

/// E[e^K - 1] for the double-exponential log-jump law.
double kou_zeta(double p, double eta1, double eta2);

/// Double-exponential jumps with intensity scaled by (x/S0)^beta.
class KouJumps final : public JumpDensity {
public:
    KouJumps(double lambda, double p, double eta1, double eta2, double S0, double beta);

    double density(double x, double y) const override;
    double cell_moment(double x, double a, double b, int p) const override;
    void cell_masses(double x, std::span<const double> edges, std::span<double> out) const override;
    double second_moment(double x) const override;
    std::optional<CaseInfo> declared_case(double lower, double upper) const override;

private:
    double scale(double x) const;
    double up_primitive(double y) const;    // mass of (y, inf) per unit scale, y >= 0
    double down_primitive(double y) const;  // mass of (-1, y) per unit scale, y <= 0

    double lambda_, p_, eta1_, eta2_, S0_, beta_;
};

/// CGMY log-jump density k(z) carried to relative jump sizes,
/// g(y) = k(log(1 + y)) / (1 + y).
class CgmyJumps final : public JumpDensity {
public:
    CgmyJumps(double C, double G, double M, double Y);

    double density(double x, double y) const override;
    double cell_moment(double x, double a, double b, int p) const override;
    void cell_masses(double x, std::span<const double> edges, std::span<double> out) const override;
    double second_moment(double) const override { return second_moment_; }
    std::optional<CaseInfo> declared_case(double lower, double upper) const override;

    /// The Levy density in log-jump coordinates.
    double log_density(double z) const;

private:
    double tail_above(double z) const;  // int_z^inf k, z > 0
    double tail_below(double z) const;  // int_-inf^z k, z < 0
    double log_mass(double z_lo, double z_hi) const;

    double C_, G_, M_, Y_;
    double second_moment_ = 0.0;
};

/// Classifies the jump part on the price range [lower, upper]. Uses the
/// density's declared regime when it has one, otherwise probes the power-law
/// exponent of g(x, y) as y -> 0.
CaseInfo classify_case(const ModelSpec& m, double lower, double upper);

/// Stable-type bounds sampled on 0 < |y| <= 1/2 for the given exponents.
StableShape sample_stable_shape(const JumpDensity& j, double lower, double upper,
                                double alpha_plus, double alpha_minus);

/// Predicted error form E(h): h in cases O and II, -h log h in case I.
double error_form(JumpCase c, double h);

}  // namespace ctmc
