#pragma once

#include <cmath>
#include <cstddef>
#include <map>
#include <memory>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "galga/error.hpp"
#include "galga/parallel.hpp"
#include "galga/space.hpp"
#include "galga/types.hpp"

namespace galga {

/// The expensive function being tabulated: physical D-vector -> K-vector.
/// Implementations must be pure and safe to call concurrently.
class TargetFunction {
public:
    virtual ~TargetFunction() = default;

    virtual const InputSpace& space() const = 0;
    virtual const std::vector<double>& wavelengths() const = 0;
    virtual Vector evaluate(const Vector& x) const = 0;

    std::size_t dim() const { return space().dim(); }
    std::size_t channels() const { return wavelengths().size(); }
};

inline std::string format_point(const Vector& x)
{
    std::ostringstream os;
    os.precision(17);
    os << '(';
    for (Eigen::Index d = 0; d < x.size(); ++d) os << (d ? ", " : "") << x[d];
    os << ')';
    return os.str();
}

/// Evaluates every row of X; results are stored in row order regardless of
/// scheduling. Failures are rethrown as TargetError naming the input.
inline Matrix evaluate_rows(const TargetFunction& f, const Matrix& X, unsigned threads = 1)
{
    if (static_cast<std::size_t>(X.cols()) != f.dim()) throw DimensionMismatch("evaluate_rows: input dimension");
    Matrix Y(X.rows(), static_cast<Eigen::Index>(f.channels()));
    parallel_for(static_cast<std::size_t>(X.rows()), threads, [&](std::size_t i) {
        const auto r = static_cast<Eigen::Index>(i);
        const Vector x = X.row(r).transpose();
        Vector y;
        try {
            y = f.evaluate(x);
        } catch (const std::exception& e) {
            throw TargetError("target failed at x = " + format_point(x) + ": " + e.what());
        }
        if (static_cast<std::size_t>(y.size()) != f.channels() || !y.allFinite())
            throw TargetError("target returned an invalid spectrum at x = " + format_point(x));
        Y.row(r) = y.transpose();
    });
    return Y;
}

inline std::vector<double> linspace(double a, double b, std::size_t n)
{
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i)
        v[i] = n == 1 ? a : a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
    return v;
}

/// Throws TargetError if x leaves the space's ranges by more than a relative
/// 1e-9 of the range width.
inline void check_in_range(const InputSpace& space, const Vector& x)
{
    if (static_cast<std::size_t>(x.size()) != space.dim()) throw DimensionMismatch("target: input dimension");
    for (std::size_t d = 0; d < space.dim(); ++d) {
        const auto& v = space[d];
        const double slack = 1e-9 * (v.max - v.min);
        const double c = x[static_cast<Eigen::Index>(d)];
        if (!(c >= v.min - slack && c <= v.max + slack))
            throw TargetError("input '" + v.name + "' = " + std::to_string(c) + " outside [" + std::to_string(v.min) +
                              ", " + std::to_string(v.max) + "]");
    }
}

// ---------------------------------------------------------------------------
// Toy top-of-atmosphere radiance over a Lambertian surface
//
//   L = L0 + (T_dir + T_dif) (E_dir cos(sza) + E_dif) rho / (pi (1 - S rho))
//
// with the transfer functions below (per channel, lambda in nm):
//   tau_A   = AOT (lambda / 550)^-alpha          aerosol optical depth
//   tau_R   = rayleigh_scale * 0.0088 (lambda / 1000)^-4.05
//   tau     = tau_R + tau_A,  tau_As = SSA tau_A,  tau_Aa = (1 - SSA) tau_A
//   tau_b   = tau_R / 2 + (1 - g) / 2 * tau_As   backscattered part
//   tau_eff = tau_b + tau_Aa                      loss for diffuse light
//   mu_s = cos(sza), mu_v = cos(vza), m = 1/mu_s + 1/mu_v
//   E_dir = E0 exp(-tau / mu_s)
//   E_dif = E0 mu_s (exp(-tau_eff / mu_s) - exp(-tau / mu_s))
//   T_dir = exp(-tau / mu_v),  T_dif = exp(-tau_eff / mu_v) - T_dir
//   S     = tau_b exp(-tau_Aa) / (1 + tau_b)
//   L0    = E0 mu_s / pi (tau_R P_R + tau_As P_HG) (1 - exp(-tau m)) / tau / (4 (mu_s + mu_v))
// P_R and P_HG are the Rayleigh and Henyey-Greenstein phase functions
// (normalized to 4 pi) at the scattering angle for a 90 deg relative azimuth,
// cos(Theta) = -mu_s mu_v. E0 is a 5778 K Planck curve scaled to 1900 at 500 nm.
// ---------------------------------------------------------------------------

struct ToyAtmosphereParams {
    std::vector<double> wavelengths = linspace(400.0, 550.0, 64);
    double reflectance = 0.1;
    double rayleigh_scale = 0.0;
    double solar_temperature = 5778.0;
    double irradiance_at_500 = 1900.0;
    /// Values used for any of AOT, SZA, alpha, g_HG, SSA, VZA that are not
    /// input variables.
    std::map<std::string, double> fixed = {{"AOT", 0.2}, {"SZA", 55.0},  {"alpha", 1.3},
                                           {"g_HG", 0.7}, {"SSA", 0.93}, {"VZA", 0.5}};
};

/// Per-channel transfer functions of the toy atmosphere.
struct Transfer {
    Vector L0, T_dir, T_dif, E_dir, E_dif, S;
    double mu_s = 1.0;
};

/// Lambertian-surface combination, channel by channel.
inline Vector lambertian_radiance(const Transfer& t, double rho)
{
    Vector L(t.L0.size());
    for (Eigen::Index k = 0; k < L.size(); ++k)
        L[k] = t.L0[k] + (t.T_dir[k] + t.T_dif[k]) * (t.E_dir[k] * t.mu_s + t.E_dif[k]) * rho /
                             (std::numbers::pi * (1.0 - t.S[k] * rho));
    return L;
}

inline double planck_shape(double lambda_nm, double temperature)
{
    constexpr double c2 = 1.438777e7;  // nm K
    return std::pow(lambda_nm, -5.0) / std::expm1(c2 / (lambda_nm * temperature));
}

class ToyAtmosphere final : public TargetFunction {
public:
    static constexpr const char* kVariables[] = {"AOT", "SZA", "alpha", "g_HG", "SSA", "VZA"};

    ToyAtmosphere(InputSpace space, ToyAtmosphereParams params) : space_(std::move(space)), p_(std::move(params))
    {
        if (p_.wavelengths.empty()) throw InvalidArgument("ToyAtmosphere: empty wavelength grid");
        for (std::size_t k = 1; k < p_.wavelengths.size(); ++k)
            if (!(p_.wavelengths[k] > p_.wavelengths[k - 1]))
                throw InvalidArgument("ToyAtmosphere: wavelengths must be strictly increasing");
        if (!(p_.reflectance >= 0.0 && p_.reflectance < 1.0))
            throw InvalidArgument("ToyAtmosphere: reflectance must be in [0, 1)");
        if (!(p_.rayleigh_scale >= 0.0)) throw InvalidArgument("ToyAtmosphere: rayleigh_scale must be >= 0");
        for (std::size_t d = 0; d < space_.dim(); ++d) {
            const int slot = slot_of(space_[d].name);
            if (slot < 0) throw InvalidArgument("ToyAtmosphere: unknown input variable '" + space_[d].name + "'");
            index_[slot] = static_cast<int>(d);
        }
        for (int s = 0; s < 6; ++s) {
            const auto it = p_.fixed.find(kVariables[s]);
            if (index_[s] < 0 && it == p_.fixed.end())
                throw InvalidArgument(std::string("ToyAtmosphere: no value for ") + kVariables[s]);
            fixed_[s] = it == p_.fixed.end() ? 0.0 : it->second;
        }
        const double norm = p_.irradiance_at_500 / planck_shape(500.0, p_.solar_temperature);
        e0_.resize(static_cast<Eigen::Index>(p_.wavelengths.size()));
        for (std::size_t k = 0; k < p_.wavelengths.size(); ++k)
            e0_[static_cast<Eigen::Index>(k)] = norm * planck_shape(p_.wavelengths[k], p_.solar_temperature);
    }

    const InputSpace& space() const override { return space_; }
    const std::vector<double>& wavelengths() const override { return p_.wavelengths; }
    const ToyAtmosphereParams& params() const noexcept { return p_; }
    const Vector& solar_irradiance() const noexcept { return e0_; }

    Transfer transfer(const Vector& x) const
    {
        check_in_range(space_, x);
        const double aot = value(x, 0), sza = value(x, 1), alpha = value(x, 2);
        const double g = value(x, 3), ssa = value(x, 4), vza = value(x, 5);
        constexpr double deg = std::numbers::pi / 180.0;
        const double mu_s = std::cos(sza * deg);
        const double mu_v = std::cos(vza * deg);
        const double m = 1.0 / mu_s + 1.0 / mu_v;
        const double cos_theta = -mu_s * mu_v;
        const double p_r = 0.75 * (1.0 + cos_theta * cos_theta);
        const double p_hg = (1.0 - g * g) / std::pow(1.0 + g * g - 2.0 * g * cos_theta, 1.5);

        const auto K = static_cast<Eigen::Index>(p_.wavelengths.size());
        Transfer t;
        t.mu_s = mu_s;
        t.L0.resize(K), t.T_dir.resize(K), t.T_dif.resize(K), t.E_dir.resize(K), t.E_dif.resize(K), t.S.resize(K);
        for (Eigen::Index k = 0; k < K; ++k) {
            const double lambda = p_.wavelengths[static_cast<std::size_t>(k)];
            const double tau_a = aot * std::pow(lambda / 550.0, -alpha);
            const double tau_r = p_.rayleigh_scale * 0.0088 * std::pow(lambda / 1000.0, -4.05);
            const double tau = tau_r + tau_a;
            const double tau_as = ssa * tau_a;
            const double tau_aa = (1.0 - ssa) * tau_a;
            const double tau_b = 0.5 * tau_r + 0.5 * (1.0 - g) * tau_as;
            const double tau_eff = tau_b + tau_aa;
            const double e0 = e0_[k];
            const double down = std::exp(-tau / mu_s);
            t.E_dir[k] = e0 * down;
            t.E_dif[k] = e0 * mu_s * (std::exp(-tau_eff / mu_s) - down);
            t.T_dir[k] = std::exp(-tau / mu_v);
            t.T_dif[k] = std::exp(-tau_eff / mu_v) - t.T_dir[k];
            t.S[k] = tau_b * std::exp(-tau_aa) / (1.0 + tau_b);
            const double escape = tau > 0.0 ? -std::expm1(-tau * m) / tau : m;
            t.L0[k] = e0 * mu_s / std::numbers::pi * (tau_r * p_r + tau_as * p_hg) * escape / (4.0 * (mu_s + mu_v));
        }
        return t;
    }

    Vector evaluate(const Vector& x) const override { return lambertian_radiance(transfer(x), p_.reflectance); }

private:
    static int slot_of(const std::string& name)
    {
        for (int s = 0; s < 6; ++s)
            if (name == kVariables[s]) return s;
        return -1;
    }

    double value(const Vector& x, int slot) const { return index_[slot] < 0 ? fixed_[slot] : x[index_[slot]]; }

    InputSpace space_;
    ToyAtmosphereParams p_;
    int index_[6] = {-1, -1, -1, -1, -1, -1};
    double fixed_[6] = {};
    Vector e0_;
};

// ---------------------------------------------------------------------------
// Test cases: input variables and error thresholds (percent)
// ---------------------------------------------------------------------------

struct CaseDefinition {
    int id = 1;
    InputSpace space;
    double epsilon_t = 0.2;
};

inline CaseDefinition test_case(int id)
{
    std::vector<Variable> v = {{"AOT", 0.05, 0.4}, {"SZA", 20.0, 70.0}};
    if (id == 1) return {1, InputSpace(v), 0.2};
    v.push_back({"alpha", 1.0, 2.0});
    v.push_back({"g_HG", 0.6, 0.99});
    if (id == 2) return {2, InputSpace(v), 1.0};
    v.push_back({"SSA", 0.85, 0.99});
    v.push_back({"VZA", 0.5, 20.0});
    if (id == 3) return {3, InputSpace(v), 2.0};
    throw InvalidArgument("unknown test case " + std::to_string(id) + " (expected 1, 2 or 3)");
}

// ---------------------------------------------------------------------------
// Synthetic targets on a given input space; u denotes normalized coordinates.
//   affine:              f_k = 2 + sum_d a_kd u_d,     a_kd = ((k+1)(d+1) mod 7 + 1) / 10
//   product-exponential: f_k = exp(-sum_d a_kd u_d),   a_kd = 3 if d == k mod D else 0.5
//   airmass-like:        f_k = cos(t) exp(-tau_k / cos(t)),  t = 20 + 50 u_1 deg,
//                        tau_k = (0.1 + 0.9 u_0) (lambda_k / 550)^-1.3
// ---------------------------------------------------------------------------

enum class SyntheticKind { Affine, ProductExponential, Airmass };

inline SyntheticKind parse_synthetic_kind(const std::string& s)
{
    if (s == "affine") return SyntheticKind::Affine;
    if (s == "product-exponential") return SyntheticKind::ProductExponential;
    if (s == "airmass-like" || s == "airmass") return SyntheticKind::Airmass;
    throw InvalidArgument("unknown synthetic target '" + s + "'");
}

class SyntheticTarget final : public TargetFunction {
public:
    SyntheticTarget(SyntheticKind kind, InputSpace space, std::size_t channels)
        : kind_(kind), space_(std::move(space)), wl_(linspace(400.0, 550.0, channels))
    {
        if (channels < 1) throw InvalidArgument("synthetic target: K must be >= 1");
        if (kind_ == SyntheticKind::Airmass && space_.dim() < 2)
            throw InvalidArgument("airmass-like target needs D >= 2");
        const auto D = static_cast<Eigen::Index>(space_.dim());
        const auto K = static_cast<Eigen::Index>(channels);
        a_.resize(K, D);
        for (Eigen::Index k = 0; k < K; ++k)
            for (Eigen::Index d = 0; d < D; ++d) {
                if (kind_ == SyntheticKind::Affine)
                    a_(k, d) = static_cast<double>(((k + 1) * (d + 1)) % 7 + 1) / 10.0;
                else
                    a_(k, d) = d == k % D ? 3.0 : 0.5;
            }
    }

    const InputSpace& space() const override { return space_; }
    const std::vector<double>& wavelengths() const override { return wl_; }
    SyntheticKind kind() const noexcept { return kind_; }
    const Matrix& coefficients() const noexcept { return a_; }

    Vector evaluate(const Vector& x) const override
    {
        check_in_range(space_, x);
        const Vector u = space_.normalize(x);
        const auto K = static_cast<Eigen::Index>(wl_.size());
        Vector y(K);
        switch (kind_) {
        case SyntheticKind::Affine:
            y = (a_ * u).array() + 2.0;
            break;
        case SyntheticKind::ProductExponential:
            y = (-(a_ * u)).array().exp();
            break;
        case SyntheticKind::Airmass: {
            const double c = std::cos((20.0 + 50.0 * u[1]) * std::numbers::pi / 180.0);
            for (Eigen::Index k = 0; k < K; ++k) {
                const double tau = (0.1 + 0.9 * u[0]) * std::pow(wl_[static_cast<std::size_t>(k)] / 550.0, -1.3);
                y[k] = c * std::exp(-tau / c);
            }
            break;
        }
        }
        return y;
    }

private:
    SyntheticKind kind_;
    InputSpace space_;
    std::vector<double> wl_;
    Matrix a_;
};

inline std::unique_ptr<TargetFunction> synthetic_target(const std::string& kind, std::size_t dim, std::size_t channels)
{
    return std::make_unique<SyntheticTarget>(parse_synthetic_kind(kind), InputSpace::unit(dim), channels);
}

}  // namespace galga
