#pragma once

#include "magarray/core.hpp"
#include "magarray/sampling.hpp"

#include <optional>
#include <string>
#include <vector>

namespace magarray {

struct Provenance {
    enum class Kind { Simulated, Measured };
    Kind kind = Kind::Simulated;
    std::string solver_mode;     ///< simulated only
    std::string instrument;      ///< measured only
    std::optional<double> temperature;         ///< degC (simulation temperature or measured mean)
    std::optional<double> temperature_spread;  ///< degC, measured only

    friend bool operator==(const Provenance&, const Provenance&) = default;
};

/// Flux density sampled on a point set.
struct FieldMap {
    SampleGrid grid;
    std::vector<Vec3> b;                    ///< T, one per grid point
    std::vector<double> point_temperature;  ///< degC, optional per point (empty if absent)
    Provenance provenance;

    std::size_t size() const { return b.size(); }
    std::vector<double> bx() const;

    /// Throws DomainError if sizes disagree or any value is non-finite.
    void validate() const;
};

bool operator==(const FieldMap& a, const FieldMap& b);

// Columnar text: optional "#@ key value" metadata lines, '#' comments, an
// optional column-name row, then rows "x y z Bx By Bz [T_degC]" in SI units.

std::string format_fieldmap(const FieldMap& map);
void save_fieldmap(const FieldMap& map, const std::string& path);
FieldMap parse_fieldmap(const std::string& content, const std::string& source = "<string>");
FieldMap load_fieldmap(const std::string& path);

struct MeasuredImportOptions {
    double length_scale = 1.0;  ///< file length unit in metres (1e-3 for mm)
    double field_scale = 1.0;   ///< file field unit in tesla (1e-3 for mT)
    std::string instrument = "unspecified";
};

/// Imports a measured scan table; provenance becomes Measured with the mean
/// and population spread of the per-point temperature column when present.
FieldMap import_measured_map(const std::string& path, const MeasuredImportOptions& opt = {});

}  // namespace magarray
