#include "magarray/fieldmap.hpp"

#include "magarray/text.hpp"

#include <cmath>
#include <sstream>

namespace magarray {

std::vector<double> FieldMap::bx() const {
    std::vector<double> out(b.size());
    for (std::size_t i = 0; i < b.size(); ++i) out[i] = b[i].x();
    return out;
}

void FieldMap::validate() const {
    if (grid.points.size() != b.size()) throw DomainError("field map: point count differs from sample count");
    if (!point_temperature.empty() && point_temperature.size() != b.size())
        throw DomainError("field map: temperature column length differs from sample count");
    for (std::size_t i = 0; i < b.size(); ++i) {
        if (!b[i].allFinite() || !grid.points[i].allFinite())
            throw DomainError("field map: non-finite value at row " + std::to_string(i));
    }
}

bool operator==(const FieldMap& a, const FieldMap& b) {
    return a.grid.points == b.grid.points && a.grid.spec == b.grid.spec && a.b == b.b &&
           a.point_temperature == b.point_temperature && a.provenance == b.provenance;
}

std::string format_fieldmap(const FieldMap& map) {
    using text::fmt;
    map.validate();
    std::string out = "#@ magarray-fieldmap 1\n";
    const auto& p = map.provenance;
    out += std::string("#@ provenance ") + (p.kind == Provenance::Kind::Simulated ? "simulated" : "measured") + "\n";
    if (!p.solver_mode.empty()) out += "#@ mode " + p.solver_mode + "\n";
    if (!p.instrument.empty()) out += "#@ instrument " + p.instrument + "\n";
    if (p.temperature) out += "#@ temperature " + fmt(*p.temperature) + "\n";
    if (p.temperature_spread) out += "#@ temperature_spread " + fmt(*p.temperature_spread) + "\n";
    const auto& s = map.grid.spec;
    out += "#@ grid " + s.shape + " " + fmt(s.diameter) + " " + fmt(s.step) + " " + to_string(s.convention) + "\n";
    const bool temps = !map.point_temperature.empty();
    out += temps ? "x y z Bx By Bz T\n" : "x y z Bx By Bz\n";
    for (std::size_t i = 0; i < map.size(); ++i) {
        const auto& x = map.grid.points[i];
        const auto& b = map.b[i];
        out += fmt(x.x()) + " " + fmt(x.y()) + " " + fmt(x.z()) + " " + fmt(b.x()) + " " + fmt(b.y()) + " " + fmt(b.z());
        if (temps) out += " " + fmt(map.point_temperature[i]);
        out += "\n";
    }
    return out;
}

void save_fieldmap(const FieldMap& map, const std::string& path) { text::write_file(path, format_fieldmap(map)); }

FieldMap parse_fieldmap(const std::string& content, const std::string& src) {
    std::istringstream in(content);
    std::string line;
    std::size_t lineno = 0;
    FieldMap map;
    map.grid.spec.shape = "points";
    bool saw_data = false;
    std::size_t columns = 0;
    try {
        while (std::getline(in, line)) {
            ++lineno;
            const std::string_view raw(line);
            if (raw.rfind("#@", 0) == 0) {
                const auto tok = text::split_ws(raw.substr(2));
                if (tok.empty()) continue;
                const std::string_view key = tok[0];
                if (key == "magarray-fieldmap") {
                    if (tok.size() != 2 || tok[1] != "1") throw ParseError(src, lineno, "unsupported field-map version");
                } else if (key == "provenance" && tok.size() == 2) {
                    if (tok[1] == "simulated") map.provenance.kind = Provenance::Kind::Simulated;
                    else if (tok[1] == "measured") map.provenance.kind = Provenance::Kind::Measured;
                    else throw ParseError(src, lineno, "unknown provenance '" + std::string(tok[1]) + "'");
                } else if (key == "mode" && tok.size() == 2) {
                    map.provenance.solver_mode = std::string(tok[1]);
                } else if (key == "instrument" && tok.size() >= 2) {
                    map.provenance.instrument = std::string(tok[1]);
                } else if (key == "temperature" && tok.size() == 2) {
                    map.provenance.temperature = text::to_double(tok[1]);
                } else if (key == "temperature_spread" && tok.size() == 2) {
                    map.provenance.temperature_spread = text::to_double(tok[1]);
                } else if (key == "grid" && tok.size() == 5) {
                    map.grid.spec.shape = std::string(tok[1]);
                    map.grid.spec.diameter = text::to_double(tok[2]);
                    map.grid.spec.step = text::to_double(tok[3]);
                    map.grid.spec.convention = grid_convention_from_string(std::string(tok[4]));
                } else {
                    throw ParseError(src, lineno, "malformed metadata line");
                }
                continue;
            }
            const auto body = text::strip(raw);
            if (body.empty()) continue;
            const auto tok = text::split_ws(body);
            if (!saw_data && !tok.empty() && (tok[0] == "x" || tok[0] == "X")) continue;  // column names
            if (tok.size() != 6 && tok.size() != 7) throw ParseError(src, lineno, "expected 6 or 7 columns");
            if (saw_data && tok.size() != columns) throw ParseError(src, lineno, "column count changed");
            columns = tok.size();
            saw_data = true;
            double v[7];
            for (std::size_t k = 0; k < tok.size(); ++k) v[k] = text::to_double(tok[k]);
            for (std::size_t k = 0; k < tok.size(); ++k)
                if (!std::isfinite(v[k])) throw ParseError(src, lineno, "non-finite value");
            map.grid.points.emplace_back(v[0], v[1], v[2]);
            map.b.emplace_back(v[3], v[4], v[5]);
            if (columns == 7) map.point_temperature.push_back(v[6]);
        }
    } catch (const std::invalid_argument& e) {
        throw ParseError(src, lineno, e.what());
    } catch (const ConfigError& e) {
        throw ParseError(src, lineno, e.what());
    }
    if (map.b.empty()) throw ParseError(src, lineno, "field map has no samples");
    return map;
}

FieldMap load_fieldmap(const std::string& path) { return parse_fieldmap(text::read_file(path), path); }

FieldMap import_measured_map(const std::string& path, const MeasuredImportOptions& opt) {
    FieldMap map = load_fieldmap(path);
    for (auto& p : map.grid.points) p *= opt.length_scale;
    for (auto& b : map.b) b *= opt.field_scale;
    map.provenance.kind = Provenance::Kind::Measured;
    map.provenance.solver_mode.clear();
    map.provenance.instrument = opt.instrument;
    if (!map.point_temperature.empty()) {
        double mean = 0.0;
        for (double t : map.point_temperature) mean += t;
        mean /= static_cast<double>(map.point_temperature.size());
        double var = 0.0;
        for (double t : map.point_temperature) var += (t - mean) * (t - mean);
        map.provenance.temperature = mean;
        map.provenance.temperature_spread = std::sqrt(var / static_cast<double>(map.point_temperature.size()));
    }
    map.validate();
    return map;
}

}  // namespace magarray
