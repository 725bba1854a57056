#pragma once

#include "magarray/core.hpp"
#include "magarray/material.hpp"

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace magarray {

/// Uniformly magnetized rectangular bar.
///
/// The local frame (u, v, w) is centred on the barycentre; v is the
/// magnetization axis. `orientation` is the canonical representation (it is
/// what files store); `frame()` is the derived local-to-global rotation whose
/// columns are the global coordinates of u, v and w.
class BarMagnet {
public:
    BarMagnet() = default;
    BarMagnet(int index, Vec3 center, Quat orientation, Vec3 half_dims, std::string material_id,
              int ring = 0, int layer = 0);

    int index = 0;
    int ring = 0;
    int layer = 0;
    std::string material_id;

    const Vec3& center() const noexcept { return center_; }
    const Quat& orientation() const noexcept { return orientation_; }
    const Mat3& frame() const noexcept { return frame_; }
    const Vec3& half_dims() const noexcept { return half_dims_; }

    Vec3 axis_u() const { return frame_.col(0); }
    Vec3 axis_v() const { return frame_.col(1); }
    Vec3 axis_w() const { return frame_.col(2); }
    double volume() const { return 8.0 * half_dims_.prod(); }

    void set_center(const Vec3& c) { center_ = c; }
    void set_orientation(const Quat& q);

    Vec3 to_local(const Vec3& global_point) const { return frame_.transpose() * (global_point - center_); }
    Vec3 vector_to_global(const Vec3& local_vector) const { return frame_ * local_vector; }

    /// Throws GeometryError on a non-unit quaternion or non-positive sizes.
    void validate() const;

    friend bool operator==(const BarMagnet& a, const BarMagnet& b);

private:
    Vec3 center_ = Vec3::Zero();
    Quat orientation_ = Quat::Identity();
    Mat3 frame_ = Mat3::Identity();
    Vec3 half_dims_ = Vec3::Ones();
};

/// Builds the orientation whose v axis is `magnetization` and w axis is
/// `w_hint` orthogonalised against it.
Quat orientation_from_axes(const Vec3& magnetization, const Vec3& w_hint);

struct ArrayModel {
    std::vector<BarMagnet> magnets;
    std::map<std::string, Material> materials;
    double temperature = 18.0;  ///< degC
    std::map<int, double> ring_z_offsets;  ///< ring shifts already applied, metres

    const Material& material_of(const BarMagnet& m) const;

    /// Every material resolves and validates, every magnet validates, and no
    /// two magnets overlap by more than `overlap_tol`.
    void validate(double overlap_tol = 1e-9) const;

    friend bool operator==(const ArrayModel&, const ArrayModel&) = default;
};

/// Demagnetizing factor for magnetization along the v half-dimension.
double demag_factor(const Vec3& half_dims);

/// Separating-axis test for two oriented boxes. Returns the penetration
/// depth along the best separating axis; <= 0 means disjoint or touching.
double overlap_depth(const BarMagnet& a, const BarMagnet& b);

/// First overlapping pair (by index order) whose depth exceeds tol.
std::optional<std::pair<std::size_t, std::size_t>> find_overlap(const std::vector<BarMagnet>& magnets,
                                                                 double tol = 1e-9);

struct ArrayExtents {
    double bore_diameter = 0.0;  ///< twice the smallest radial distance of any vertex from the z axis
    double outer_diameter = 0.0;
    double axial_length = 0.0;   ///< z extent of all vertices
};

ArrayExtents array_extents(const ArrayModel& array);

// File formats -------------------------------------------------------------
//
// Geometry file (text, one record per line, '#' comments):
//
//   magarray-geometry 1
//   temperature <degC>
//   material <id> jr0=<T> hc0=<A/m> tref=<degC> kj=<1/degC> kh1=<1/degC> kh2=<1/degC^2>
//            mu_m=<-> [curve=<path relative to file>] [convention=total|offset]
//   curve <material id> <rows> total|offset        followed by <rows> lines "H J"
//   ring_offset <ring> <metres>
//   magnet <index> <ring> <layer> <cx> <cy> <cz> <qw> <qx> <qy> <qz> <Lu> <Lv> <Lw> <material id>
//
// save_array always writes curves inline; numbers use shortest round-trip form.

ArrayModel load_array(const std::string& path);
ArrayModel parse_array(const std::string& content, const std::string& source = "<string>",
                       const std::string& base_dir = ".");
std::string format_array(const ArrayModel& array);
void save_array(const ArrayModel& array, const std::string& path);

/// Ring-offset override file: "<ring> <z offset in metres>" per line.
std::map<int, double> load_ring_offsets(const std::string& path);
void save_ring_offsets(const std::map<int, double>& offsets, const std::string& path);

}  // namespace magarray
