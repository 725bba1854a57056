#include "magarray/geometry.hpp"

#include "magarray/text.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <limits>
#include <sstream>

namespace magarray {

BarMagnet::BarMagnet(int index_, Vec3 center, Quat orientation, Vec3 half_dims, std::string material,
                     int ring_, int layer_)
    : index(index_), ring(ring_), layer(layer_), material_id(std::move(material)), center_(std::move(center)),
      half_dims_(std::move(half_dims)) {
    set_orientation(orientation);
}

void BarMagnet::set_orientation(const Quat& q) {
    orientation_ = q;
    frame_ = q.toRotationMatrix();
}

void BarMagnet::validate() const {
    const std::string who = "magnet " + std::to_string(index);
    if (!(half_dims_.minCoeff() > 0.0) || !half_dims_.allFinite())
        throw GeometryError(who + ": half-dimensions must be positive");
    if (!center_.allFinite()) throw GeometryError(who + ": non-finite centre");
    if (std::abs(orientation_.norm() - 1.0) > 1e-12) throw GeometryError(who + ": orientation is not a unit quaternion");
    const double ortho = (frame_.transpose() * frame_ - Mat3::Identity()).cwiseAbs().maxCoeff();
    if (ortho > 1e-12 || std::abs(frame_.determinant() - 1.0) > 1e-12)
        throw GeometryError(who + ": frame is not a proper rotation");
}

bool operator==(const BarMagnet& a, const BarMagnet& b) {
    return a.index == b.index && a.ring == b.ring && a.layer == b.layer && a.material_id == b.material_id &&
           a.center_ == b.center_ && a.orientation_.coeffs() == b.orientation_.coeffs() &&
           a.half_dims_ == b.half_dims_;
}

Quat orientation_from_axes(const Vec3& magnetization, const Vec3& w_hint) {
    const Vec3 v = magnetization.normalized();
    Vec3 w = w_hint - w_hint.dot(v) * v;
    if (w.norm() < 1e-12) throw GeometryError("orientation_from_axes: w hint parallel to magnetization");
    w.normalize();
    const Vec3 u = v.cross(w);
    Mat3 r;
    r.col(0) = u;
    r.col(1) = v;
    r.col(2) = w;
    Quat q(r);
    q.normalize();
    return q;
}

const Material& ArrayModel::material_of(const BarMagnet& m) const {
    auto it = materials.find(m.material_id);
    if (it == materials.end())
        throw ReferenceError("magnet " + std::to_string(m.index) + ": unknown material '" + m.material_id + "'");
    return it->second;
}

void ArrayModel::validate(double overlap_tol) const {
    for (const auto& [id, mat] : materials) {
        if (id != mat.id) throw ReferenceError("material key '" + id + "' does not match record id '" + mat.id + "'");
        mat.validate();
    }
    for (const auto& m : magnets) {
        m.validate();
        (void)material_of(m);
    }
    if (auto pair = find_overlap(magnets, overlap_tol)) {
        throw GeometryError("magnets " + std::to_string(magnets[pair->first].index) + " and " +
                            std::to_string(magnets[pair->second].index) + " overlap");
    }
}

double demag_factor(const Vec3& half_dims) {
    const double lu = half_dims.x(), lv = half_dims.y(), lw = half_dims.z();
    if (!(lu > 0.0 && lv > 0.0 && lw > 0.0)) throw DomainError("demag_factor: dimensions must be positive");
    // ratio form: a cube gives exactly 1/3 and u, w enter symmetrically
    return 1.0 / (1.0 + (lv / lu + lv / lw));
}

double overlap_depth(const BarMagnet& a, const BarMagnet& b) {
    const Mat3& fa = a.frame();
    const Mat3& fb = b.frame();
    const Vec3 d = b.center() - a.center();

    std::array<Vec3, 15> axes;
    int n = 0;
    for (int k = 0; k < 3; ++k) axes[n++] = fa.col(k);
    for (int k = 0; k < 3; ++k) axes[n++] = fb.col(k);
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            Vec3 c = fa.col(i).cross(fb.col(j));
            const double len = c.norm();
            if (len > 1e-9) axes[n++] = c / len;
        }
    }

    double depth = std::numeric_limits<double>::infinity();
    for (int k = 0; k < n; ++k) {
        const Vec3& l = axes[k];
        double ra = 0.0, rb = 0.0;
        for (int i = 0; i < 3; ++i) {
            ra += std::abs(l.dot(fa.col(i))) * a.half_dims()[i];
            rb += std::abs(l.dot(fb.col(i))) * b.half_dims()[i];
        }
        depth = std::min(depth, ra + rb - std::abs(l.dot(d)));
        if (depth <= 0.0) return depth;
    }
    return depth;
}

std::optional<std::pair<std::size_t, std::size_t>> find_overlap(const std::vector<BarMagnet>& magnets, double tol) {
    // Sweep along z over bounding spheres.
    const std::size_t n = magnets.size();
    std::vector<std::size_t> order(n);
    std::vector<double> radius(n);
    for (std::size_t i = 0; i < n; ++i) {
        order[i] = i;
        radius[i] = magnets[i].half_dims().norm();
    }
    std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
        const double zx = magnets[x].center().z() - radius[x], zy = magnets[y].center().z() - radius[y];
        return zx < zy || (zx == zy && x < y);
    });
    std::optional<std::pair<std::size_t, std::size_t>> best;
    for (std::size_t oi = 0; oi < n; ++oi) {
        const std::size_t i = order[oi];
        const double top = magnets[i].center().z() + radius[i];
        for (std::size_t oj = oi + 1; oj < n; ++oj) {
            const std::size_t j = order[oj];
            if (magnets[j].center().z() - radius[j] > top + tol) break;
            if ((magnets[i].center() - magnets[j].center()).norm() > radius[i] + radius[j] + tol) continue;
            if (overlap_depth(magnets[i], magnets[j]) > tol) {
                const std::pair<std::size_t, std::size_t> pair(std::min(i, j), std::max(i, j));
                if (!best || pair < *best) best = pair;
            }
        }
    }
    return best;
}

ArrayExtents array_extents(const ArrayModel& array) {
    ArrayExtents e;
    if (array.magnets.empty()) return e;
    double rmin = std::numeric_limits<double>::infinity(), rmax = 0.0;
    double zmin = std::numeric_limits<double>::infinity(), zmax = -zmin;
    for (const auto& m : array.magnets) {
        for (int c = 0; c < 8; ++c) {
            const Vec3 corner((c & 1 ? 1.0 : -1.0) * m.half_dims().x(), (c & 2 ? 1.0 : -1.0) * m.half_dims().y(),
                              (c & 4 ? 1.0 : -1.0) * m.half_dims().z());
            const Vec3 p = m.center() + m.frame() * corner;
            const double r = std::hypot(p.x(), p.y());
            rmin = std::min(rmin, r);
            rmax = std::max(rmax, r);
            zmin = std::min(zmin, p.z());
            zmax = std::max(zmax, p.z());
        }
    }
    e.bore_diameter = 2.0 * rmin;
    e.outer_diameter = 2.0 * rmax;
    e.axial_length = zmax - zmin;
    return e;
}

// ---------------------------------------------------------------------------
// Text format

namespace {

constexpr std::string_view kMagic = "magarray-geometry";
constexpr int kSchema = 1;

CurveConvention parse_convention(std::string_view s, const std::string& src, std::size_t line) {
    if (s == "total") return CurveConvention::Total;
    if (s == "offset") return CurveConvention::Offset;
    throw ParseError(src, line, "unknown curve convention '" + std::string(s) + "'");
}

std::string_view convention_name(CurveConvention c) { return c == CurveConvention::Total ? "total" : "offset"; }

}  // namespace

ArrayModel parse_array(const std::string& content, const std::string& src, const std::string& base_dir) {
    std::istringstream in(content);
    std::string line;
    std::size_t lineno = 0;
    ArrayModel array;
    bool have_header = false;
    std::map<std::string, std::size_t> material_line;

    auto next_data_line = [&](std::string_view& body) {
        while (std::getline(in, line)) {
            ++lineno;
            body = text::strip(line);
            if (!body.empty()) return true;
        }
        return false;
    };

    std::string_view body;
    try {
        while (next_data_line(body)) {
            const auto tok = text::split_ws(body);
            const std::string_view kw = tok[0];
            if (!have_header) {
                if (kw != kMagic || tok.size() != 2) throw ParseError(src, lineno, "missing 'magarray-geometry <version>' header");
                if (text::to_int(tok[1]) != kSchema)
                    throw ParseError(src, lineno, "unsupported schema version " + std::string(tok[1]));
                have_header = true;
                continue;
            }
            if (kw == "temperature") {
                if (tok.size() != 2) throw ParseError(src, lineno, "temperature takes one value");
                array.temperature = text::to_double(tok[1]);
            } else if (kw == "material") {
                if (tok.size() < 2) throw ParseError(src, lineno, "material needs an id");
                Material m;
                m.id = std::string(tok[1]);
                std::optional<std::string> curve_path;
                for (std::size_t k = 2; k < tok.size(); ++k) {
                    const auto eq = tok[k].find('=');
                    if (eq == std::string_view::npos) throw ParseError(src, lineno, "expected key=value, got '" + std::string(tok[k]) + "'");
                    const auto key = tok[k].substr(0, eq);
                    const auto val = tok[k].substr(eq + 1);
                    if (key == "jr0") m.jr0 = text::to_double(val);
                    else if (key == "hc0") m.hc0 = text::to_double(val);
                    else if (key == "tref") m.t_ref = text::to_double(val);
                    else if (key == "kj") m.k_j = text::to_double(val);
                    else if (key == "kh1") m.k_h1 = text::to_double(val);
                    else if (key == "kh2") m.k_h2 = text::to_double(val);
                    else if (key == "mu_m") m.mu_m = text::to_double(val);
                    else if (key == "curve") curve_path = std::string(val);
                    else if (key == "convention") m.curve_convention = parse_convention(val, src, lineno);
                    else throw ParseError(src, lineno, "unknown material key '" + std::string(key) + "'");
                }
                if (curve_path) {
                    std::filesystem::path p(*curve_path);
                    if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
                    m.hj_curve = load_curve(p.string());
                }
                if (array.materials.count(m.id)) throw ParseError(src, lineno, "duplicate material '" + m.id + "'");
                material_line[m.id] = lineno;
                array.materials.emplace(m.id, std::move(m));
            } else if (kw == "curve") {
                if (tok.size() != 4) throw ParseError(src, lineno, "curve <material> <rows> <convention>");
                auto it = array.materials.find(std::string(tok[1]));
                if (it == array.materials.end()) throw ParseError(src, lineno, "curve for undeclared material '" + std::string(tok[1]) + "'");
                const long long rows = text::to_int(tok[2]);
                if (rows < 2) throw ParseError(src, lineno, "curve needs at least two rows");
                const CurveConvention conv = parse_convention(tok[3], src, lineno);
                std::vector<double> h, j;
                for (long long r = 0; r < rows; ++r) {
                    if (!next_data_line(body)) throw ParseError(src, lineno, "curve truncated");
                    const auto row = text::split_ws(body);
                    if (row.size() != 2) throw ParseError(src, lineno, "curve row needs two columns");
                    h.push_back(text::to_double(row[0]));
                    j.push_back(text::to_double(row[1]));
                }
                try {
                    it->second.hj_curve = HJCurve(std::move(h), std::move(j));
                } catch (const DomainError& e) {
                    throw ParseError(src, lineno, e.what());
                }
                it->second.curve_convention = conv;
            } else if (kw == "ring_offset") {
                if (tok.size() != 3) throw ParseError(src, lineno, "ring_offset <ring> <metres>");
                array.ring_z_offsets[static_cast<int>(text::to_int(tok[1]))] = text::to_double(tok[2]);
            } else if (kw == "magnet") {
                if (tok.size() != 15) throw ParseError(src, lineno, "magnet record needs 14 fields");
                const int index = static_cast<int>(text::to_int(tok[1]));
                const int ring = static_cast<int>(text::to_int(tok[2]));
                const int layer = static_cast<int>(text::to_int(tok[3]));
                const Vec3 c(text::to_double(tok[4]), text::to_double(tok[5]), text::to_double(tok[6]));
                const Quat q(text::to_double(tok[7]), text::to_double(tok[8]), text::to_double(tok[9]), text::to_double(tok[10]));
                const Vec3 hd(text::to_double(tok[11]), text::to_double(tok[12]), text::to_double(tok[13]));
                BarMagnet m(index, c, q, hd, std::string(tok[14]), ring, layer);
                try {
                    m.validate();
                } catch (const GeometryError& e) {
                    throw ParseError(src, lineno, e.what());
                }
                array.magnets.push_back(std::move(m));
            } else {
                throw ParseError(src, lineno, "unknown record '" + std::string(kw) + "'");
            }
        }
    } catch (const std::invalid_argument& e) {
        throw ParseError(src, lineno, e.what());
    } catch (const DomainError& e) {
        throw ParseError(src, lineno, e.what());
    }
    if (!have_header) throw ParseError(src, lineno, "empty geometry file");

    for (const auto& m : array.magnets) {
        if (!array.materials.count(m.material_id))
            throw ReferenceError(src + ": magnet " + std::to_string(m.index) + " references unknown material '" +
                                 m.material_id + "'");
    }
    for (const auto& [id, mat] : array.materials) {
        try {
            mat.validate();
        } catch (const DomainError& e) {
            throw ParseError(src, material_line[id], e.what());
        }
    }
    array.validate();
    return array;
}

ArrayModel load_array(const std::string& path) {
    const std::string content = text::read_file(path);
    const auto base = std::filesystem::path(path).parent_path().string();
    return parse_array(content, path, base.empty() ? "." : base);
}

std::string format_array(const ArrayModel& a) {
    using text::fmt;
    std::string out;
    out += std::string(kMagic) + " " + std::to_string(kSchema) + "\n";
    out += "temperature " + fmt(a.temperature) + "\n";
    for (const auto& [id, m] : a.materials) {
        out += "material " + id + " jr0=" + fmt(m.jr0) + " hc0=" + fmt(m.hc0) + " tref=" + fmt(m.t_ref) +
               " kj=" + fmt(m.k_j) + " kh1=" + fmt(m.k_h1) + " kh2=" + fmt(m.k_h2) + " mu_m=" + fmt(m.mu_m) + "\n";
    }
    for (const auto& [id, m] : a.materials) {
        if (!m.hj_curve) continue;
        out += "curve " + id + " " + std::to_string(m.hj_curve->size()) + " " +
               std::string(convention_name(m.curve_convention)) + "\n";
        for (std::size_t k = 0; k < m.hj_curve->size(); ++k)
            out += fmt(m.hj_curve->h()[k]) + " " + fmt(m.hj_curve->j()[k]) + "\n";
    }
    for (const auto& [ring, dz] : a.ring_z_offsets) out += "ring_offset " + std::to_string(ring) + " " + fmt(dz) + "\n";
    out += "# magnet index ring layer cx cy cz qw qx qy qz Lu Lv Lw material\n";
    for (const auto& m : a.magnets) {
        const auto& q = m.orientation();
        out += "magnet " + std::to_string(m.index) + " " + std::to_string(m.ring) + " " + std::to_string(m.layer) + " " +
               fmt(m.center().x()) + " " + fmt(m.center().y()) + " " + fmt(m.center().z()) + " " + fmt(q.w()) + " " +
               fmt(q.x()) + " " + fmt(q.y()) + " " + fmt(q.z()) + " " + fmt(m.half_dims().x()) + " " +
               fmt(m.half_dims().y()) + " " + fmt(m.half_dims().z()) + " " + m.material_id + "\n";
    }
    return out;
}

void save_array(const ArrayModel& array, const std::string& path) { text::write_file(path, format_array(array)); }

std::map<int, double> load_ring_offsets(const std::string& path) {
    const std::string content = text::read_file(path);
    std::istringstream in(content);
    std::string line;
    std::size_t lineno = 0;
    std::map<int, double> out;
    while (std::getline(in, line)) {
        ++lineno;
        const auto body = text::strip(line);
        if (body.empty()) continue;
        const auto tok = text::split_ws(body);
        if (tok.size() != 2) throw ParseError(path, lineno, "expected '<ring> <offset>'");
        try {
            const int ring = static_cast<int>(text::to_int(tok[0]));
            if (out.count(ring)) throw ParseError(path, lineno, "duplicate ring " + std::to_string(ring));
            out[ring] = text::to_double(tok[1]);
        } catch (const std::invalid_argument& e) {
            throw ParseError(path, lineno, e.what());
        }
    }
    return out;
}

void save_ring_offsets(const std::map<int, double>& offsets, const std::string& path) {
    std::string out = "# ring z_offset[m]\n";
    for (const auto& [ring, dz] : offsets) out += std::to_string(ring) + " " + text::fmt(dz) + "\n";
    text::write_file(path, out);
}

}  // namespace magarray
