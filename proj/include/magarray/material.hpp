#pragma once

#include "magarray/core.hpp"

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace magarray {

/// Monotone H-J table, H in A/m ascending, J in tesla.
///
/// Evaluation is piecewise linear inside the table and linear extrapolation
/// with the end-segment slopes outside it.
class HJCurve {
public:
    HJCurve() = default;
    HJCurve(std::vector<double> h, std::vector<double> j);

    double operator()(double h) const;

    /// Slope of the segment containing `h` (end slopes outside the table).
    double slope(double h) const;
    double min_slope() const;
    double max_slope() const;

    std::size_t size() const noexcept { return h_.size(); }
    bool empty() const noexcept { return h_.empty(); }
    const std::vector<double>& h() const noexcept { return h_; }
    const std::vector<double>& j() const noexcept { return j_; }

    /// Affine axis scaling: (H, J) -> (h_scale*H, j_scale*J + j_shift).
    /// Both scales must be positive.
    HJCurve transformed(double h_scale, double j_scale, double j_shift = 0.0) const;

    friend bool operator==(const HJCurve&, const HJCurve&) = default;

private:
    std::size_t segment(double h) const;

    std::vector<double> h_;
    std::vector<double> j_;
};

/// How a tabulated curve relates to the remanence.
enum class CurveConvention {
    Total,   ///< table is J(H) itself, J(0) = J_r0
    Offset,  ///< table is the shape g(H) with g(0) = 0; J = g(H) + J_r0
};

struct Material {
    std::string id;
    double jr0 = 0.0;    ///< remanence at t_ref, tesla
    double hc0 = 0.0;    ///< coercivity at t_ref, A/m (negative)
    double t_ref = 18.0; ///< degC
    double k_j = 0.0;    ///< 1/degC
    double k_h1 = 0.0;   ///< 1/degC
    double k_h2 = 0.0;   ///< 1/degC^2
    double mu_m = 0.0;   ///< relative recoil susceptibility of the linear law
    std::optional<HJCurve> hj_curve;  ///< measured at t_ref
    CurveConvention curve_convention = CurveConvention::Total;

    /// Curve in the Total convention (J(0) = J_r0), or nullopt.
    std::optional<HJCurve> total_curve() const;

    /// Throws DomainError on invariant violations (J_r0 <= 0, non-monotone
    /// curve, curve missing the remanence point).
    void validate() const;

    friend bool operator==(const Material&, const Material&) = default;
};

struct MaterialState {
    double jr = 0.0;                    ///< tesla
    double hc = 0.0;                    ///< A/m
    std::optional<HJCurve> scaled_curve;  ///< Total convention, scaled to T
};

inline constexpr double kMinSaneTemperature = -40.0;
inline constexpr double kMaxSaneTemperature = 120.0;

/// Temperature laws for remanence and coercivity; a tabulated curve is
/// scaled affinely by J_r(T)/J_r0 on the J axis and H_c(T)/H_c0 on the H axis.
MaterialState material_at_temperature(const Material& m, double temperature_c);

double remanence_at(const Material& m, double temperature_c);
double coercivity_at(const Material& m, double temperature_c);

/// Reference N52 records for the 12 mm cube and the 12x12x50 mm bar.
/// Neither carries a measured curve; see placeholder_curve().
Material reference_material_cube();
Material reference_material_long();

/// Synthetic monotone H-J curve in the Total convention: linear recoil with
/// slope mu0*mu_M near remanence and an exponential knee reaching J = 0 at
/// H_c0. Tabulated on [-0.9, 0.1]|H_c0|, so the knee itself lies beyond the
/// table (linear extrapolation). This is NOT measured data.
HJCurve placeholder_curve(const Material& m, std::size_t samples = 241);

/// Two-column text table (H [A/m], J [T]); '#' starts a comment.
HJCurve load_curve(const std::string& path);
void save_curve(const HJCurve& curve, const std::string& path);

}  // namespace magarray
