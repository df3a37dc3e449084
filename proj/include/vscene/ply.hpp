#pragma once

#include <array>
#include <cctype>
#include <cstdint>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "vscene/geometry.hpp"

namespace vscene {

struct PlyMesh {
    std::vector<Point3> vertices;
    std::vector<std::array<int, 3>> faces;
};

struct LabeledPoints {
    PointCloud cloud;
    std::vector<int> instance_ids;
    std::vector<int> class_ids;
};

namespace ply {

enum class Scalar { I8, U8, I16, U16, I32, U32, F32, F64 };

inline std::size_t scalar_size(Scalar s) {
    switch (s) {
        case Scalar::I8:
        case Scalar::U8: return 1;
        case Scalar::I16:
        case Scalar::U16: return 2;
        case Scalar::I32:
        case Scalar::U32:
        case Scalar::F32: return 4;
        case Scalar::F64: return 8;
    }
    return 0;
}

inline Scalar parse_scalar(const std::string& t) {
    if (t == "char" || t == "int8") return Scalar::I8;
    if (t == "uchar" || t == "uint8") return Scalar::U8;
    if (t == "short" || t == "int16") return Scalar::I16;
    if (t == "ushort" || t == "uint16") return Scalar::U16;
    if (t == "int" || t == "int32") return Scalar::I32;
    if (t == "uint" || t == "uint32") return Scalar::U32;
    if (t == "float" || t == "float32") return Scalar::F32;
    if (t == "double" || t == "float64") return Scalar::F64;
    throw std::runtime_error("ply: unknown type '" + t + "'");
}

struct Property {
    std::string name;
    bool is_list = false;
    Scalar count_type = Scalar::U8;
    Scalar value_type = Scalar::F32;
};

struct Element {
    std::string name;
    std::size_t count = 0;
    std::vector<Property> properties;
};

struct Header {
    bool binary = false;
    std::vector<Element> elements;
    std::size_t data_offset = 0;  // byte offset of the first data byte
};

inline Header parse_header(const std::string& content, const std::string& origin) {
    Header h;
    std::size_t pos = 0;
    const auto next_line = [&]() -> std::string {
        if (pos >= content.size()) throw std::runtime_error("ply: truncated header in " + origin);
        std::size_t end = content.find('\n', pos);
        if (end == std::string::npos) end = content.size();
        std::string line = content.substr(pos, end - pos);
        pos = end + 1;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        return line;
    };
    if (next_line() != "ply") throw std::runtime_error("ply: missing magic in " + origin);
    for (;;) {
        const std::string line = next_line();
        std::istringstream ls(line);
        std::string tok;
        ls >> tok;
        if (tok == "comment" || tok == "obj_info" || tok.empty()) continue;
        if (tok == "format") {
            std::string fmt;
            ls >> fmt;
            if (fmt == "ascii") h.binary = false;
            else if (fmt == "binary_little_endian") h.binary = true;
            else throw std::runtime_error("ply: unsupported format '" + fmt + "' in " + origin);
        } else if (tok == "element") {
            Element e;
            ls >> e.name >> e.count;
            h.elements.push_back(e);
        } else if (tok == "property") {
            if (h.elements.empty()) throw std::runtime_error("ply: property before element in " + origin);
            Property p;
            std::string t;
            ls >> t;
            if (t == "list") {
                std::string ct, vt;
                ls >> ct >> vt >> p.name;
                p.is_list = true;
                p.count_type = parse_scalar(ct);
                p.value_type = parse_scalar(vt);
            } else {
                p.value_type = parse_scalar(t);
                ls >> p.name;
            }
            h.elements.back().properties.push_back(p);
        } else if (tok == "end_header") {
            break;
        } else {
            throw std::runtime_error("ply: unexpected header token '" + tok + "' in " + origin);
        }
    }
    h.data_offset = pos;
    return h;
}

class Cursor {
public:
    Cursor(const std::string& content, std::size_t offset, bool binary, std::string origin)
        : content_(content), pos_(offset), binary_(binary), origin_(std::move(origin)) {}

    double read(Scalar type) {
        return binary_ ? read_binary(type) : read_ascii();
    }

    void skip(Scalar type) {
        if (binary_) {
            require(scalar_size(type));
            pos_ += scalar_size(type);
        } else {
            read_ascii();
        }
    }

private:
    double read_ascii() {
        while (pos_ < content_.size() && std::isspace(static_cast<unsigned char>(content_[pos_]))) ++pos_;
        if (pos_ >= content_.size()) throw std::runtime_error("ply: truncated data in " + origin_);
        const char* start = content_.data() + pos_;
        char* end = nullptr;
        const double v = std::strtod(start, &end);
        if (end == start) throw std::runtime_error("ply: bad numeric token in " + origin_);
        pos_ += static_cast<std::size_t>(end - start);
        return v;
    }

    void require(std::size_t n) const {
        if (pos_ + n > content_.size()) throw std::runtime_error("ply: truncated data in " + origin_);
    }

    double read_binary(Scalar type) {
        require(scalar_size(type));
        const char* p = content_.data() + pos_;
        pos_ += scalar_size(type);
        switch (type) {
            case Scalar::I8: { std::int8_t v; std::memcpy(&v, p, 1); return v; }
            case Scalar::U8: { std::uint8_t v; std::memcpy(&v, p, 1); return v; }
            case Scalar::I16: { std::int16_t v; std::memcpy(&v, p, 2); return v; }
            case Scalar::U16: { std::uint16_t v; std::memcpy(&v, p, 2); return v; }
            case Scalar::I32: { std::int32_t v; std::memcpy(&v, p, 4); return v; }
            case Scalar::U32: { std::uint32_t v; std::memcpy(&v, p, 4); return v; }
            case Scalar::F32: { float v; std::memcpy(&v, p, 4); return v; }
            case Scalar::F64: { double v; std::memcpy(&v, p, 8); return v; }
        }
        return 0.0;
    }

    const std::string& content_;
    std::size_t pos_;
    bool binary_;
    std::string origin_;
};

struct Contents {
    std::vector<Point3> vertices;
    std::vector<Point3> normals;        // nonempty only if nx,ny,nz present
    std::vector<int> instance_ids;      // nonempty only if instance_id present
    std::vector<int> class_ids;         // nonempty only if class_id present
    std::vector<std::array<int, 3>> faces;
};

inline std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open file: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return std::move(buf).str();
}

/// Reads vertices (plus optional normals and labels) and triangulated faces
/// from an ASCII or binary-little-endian PLY file.
inline Contents read(const std::filesystem::path& path) {
    const std::string content = slurp(path);
    const Header header = parse_header(content, path.string());
    Cursor cur(content, header.data_offset, header.binary, path.string());

    Contents out;
    for (const Element& elem : header.elements) {
        if (elem.name == "vertex") {
            int ix = -1, iy = -1, iz = -1, inx = -1, iny = -1, inz = -1, iinst = -1, icls = -1;
            for (std::size_t p = 0; p < elem.properties.size(); ++p) {
                const std::string& n = elem.properties[p].name;
                if (n == "x") ix = static_cast<int>(p);
                else if (n == "y") iy = static_cast<int>(p);
                else if (n == "z") iz = static_cast<int>(p);
                else if (n == "nx") inx = static_cast<int>(p);
                else if (n == "ny") iny = static_cast<int>(p);
                else if (n == "nz") inz = static_cast<int>(p);
                else if (n == "instance_id") iinst = static_cast<int>(p);
                else if (n == "class_id") icls = static_cast<int>(p);
            }
            if (ix < 0 || iy < 0 || iz < 0) {
                throw std::runtime_error("ply: vertex element lacks x/y/z in " + path.string());
            }
            const bool has_n = inx >= 0 && iny >= 0 && inz >= 0;
            out.vertices.reserve(elem.count);
            std::vector<double> row(elem.properties.size());
            for (std::size_t i = 0; i < elem.count; ++i) {
                for (std::size_t p = 0; p < elem.properties.size(); ++p) {
                    const Property& prop = elem.properties[p];
                    if (prop.is_list) {
                        const auto n = static_cast<std::size_t>(cur.read(prop.count_type));
                        for (std::size_t j = 0; j < n; ++j) cur.skip(prop.value_type);
                        row[p] = 0.0;
                    } else {
                        row[p] = cur.read(prop.value_type);
                    }
                }
                out.vertices.push_back({row[ix], row[iy], row[iz]});
                if (has_n) out.normals.push_back({row[inx], row[iny], row[inz]});
                if (iinst >= 0) out.instance_ids.push_back(static_cast<int>(row[iinst]));
                if (icls >= 0) out.class_ids.push_back(static_cast<int>(row[icls]));
            }
        } else if (elem.name == "face") {
            for (std::size_t i = 0; i < elem.count; ++i) {
                for (const Property& prop : elem.properties) {
                    if (prop.is_list &&
                        (prop.name == "vertex_indices" || prop.name == "vertex_index")) {
                        const auto n = static_cast<std::size_t>(cur.read(prop.count_type));
                        std::vector<int> poly(n);
                        for (auto& v : poly) v = static_cast<int>(cur.read(prop.value_type));
                        for (std::size_t j = 2; j < n; ++j) {  // fan triangulation
                            out.faces.push_back({poly[0], poly[j - 1], poly[j]});
                        }
                    } else if (prop.is_list) {
                        const auto n = static_cast<std::size_t>(cur.read(prop.count_type));
                        for (std::size_t j = 0; j < n; ++j) cur.skip(prop.value_type);
                    } else {
                        cur.skip(prop.value_type);
                    }
                }
            }
        } else {
            for (std::size_t i = 0; i < elem.count; ++i) {
                for (const Property& prop : elem.properties) {
                    if (prop.is_list) {
                        const auto n = static_cast<std::size_t>(cur.read(prop.count_type));
                        for (std::size_t j = 0; j < n; ++j) cur.skip(prop.value_type);
                    } else {
                        cur.skip(prop.value_type);
                    }
                }
            }
        }
    }
    return out;
}

inline void append_f32(std::string& buf, double v) {
    const float f = static_cast<float>(v);
    char raw[4];
    std::memcpy(raw, &f, 4);
    buf.append(raw, 4);
}

inline void append_i32(std::string& buf, int v) {
    const std::int32_t i = v;
    char raw[4];
    std::memcpy(raw, &i, 4);
    buf.append(raw, 4);
}

}  // namespace ply

/// Writes `content` through a temporary file in the same directory, then
/// renames it into place.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write file: " + tmp.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
    }
    std::filesystem::rename(tmp, path);
}

inline PointCloud read_point_cloud_ply(const std::filesystem::path& path) {
    ply::Contents c = ply::read(path);
    PointCloud cloud;
    cloud.points = std::move(c.vertices);
    cloud.normals = std::move(c.normals);
    return cloud;
}

inline PlyMesh read_mesh_ply(const std::filesystem::path& path) {
    ply::Contents c = ply::read(path);
    return {std::move(c.vertices), std::move(c.faces)};
}

inline LabeledPoints read_labeled_ply(const std::filesystem::path& path) {
    ply::Contents c = ply::read(path);
    LabeledPoints out;
    out.cloud.points = std::move(c.vertices);
    out.instance_ids = std::move(c.instance_ids);
    out.class_ids = std::move(c.class_ids);
    return out;
}

inline void write_point_cloud_ply(const std::filesystem::path& path, const PointCloud& cloud,
                                  bool binary = true) {
    std::string buf;
    std::ostringstream header;
    header << "ply\nformat " << (binary ? "binary_little_endian" : "ascii") << " 1.0\n"
           << "element vertex " << cloud.size() << "\n"
           << "property float x\nproperty float y\nproperty float z\n";
    if (cloud.has_normals()) {
        header << "property float nx\nproperty float ny\nproperty float nz\n";
    }
    header << "end_header\n";
    buf = header.str();
    if (binary) {
        for (std::size_t i = 0; i < cloud.size(); ++i) {
            const Point3& p = cloud.points[i];
            ply::append_f32(buf, p.x);
            ply::append_f32(buf, p.y);
            ply::append_f32(buf, p.z);
            if (cloud.has_normals()) {
                const Point3& n = cloud.normals[i];
                ply::append_f32(buf, n.x);
                ply::append_f32(buf, n.y);
                ply::append_f32(buf, n.z);
            }
        }
    } else {
        std::ostringstream body;
        body.precision(9);
        for (std::size_t i = 0; i < cloud.size(); ++i) {
            const Point3& p = cloud.points[i];
            body << p.x << ' ' << p.y << ' ' << p.z;
            if (cloud.has_normals()) {
                const Point3& n = cloud.normals[i];
                body << ' ' << n.x << ' ' << n.y << ' ' << n.z;
            }
            body << '\n';
        }
        buf += body.str();
    }
    write_file_atomic(path, buf);
}

inline void write_mesh_ply(const std::filesystem::path& path, const PlyMesh& mesh,
                           bool binary = true) {
    std::string buf;
    std::ostringstream header;
    header << "ply\nformat " << (binary ? "binary_little_endian" : "ascii") << " 1.0\n"
           << "element vertex " << mesh.vertices.size() << "\n"
           << "property float x\nproperty float y\nproperty float z\n"
           << "element face " << mesh.faces.size() << "\n"
           << "property list uchar int vertex_indices\nend_header\n";
    buf = header.str();
    if (binary) {
        for (const Point3& p : mesh.vertices) {
            ply::append_f32(buf, p.x);
            ply::append_f32(buf, p.y);
            ply::append_f32(buf, p.z);
        }
        for (const auto& f : mesh.faces) {
            buf.push_back(static_cast<char>(3));
            ply::append_i32(buf, f[0]);
            ply::append_i32(buf, f[1]);
            ply::append_i32(buf, f[2]);
        }
    } else {
        std::ostringstream body;
        body.precision(9);
        for (const Point3& p : mesh.vertices) body << p.x << ' ' << p.y << ' ' << p.z << '\n';
        for (const auto& f : mesh.faces) body << "3 " << f[0] << ' ' << f[1] << ' ' << f[2] << '\n';
        buf += body.str();
    }
    write_file_atomic(path, buf);
}

/// Scene export format: binary little-endian, one vertex element carrying
/// position plus per-point instance and class ids.
inline void write_labeled_ply(const std::filesystem::path& path, const LabeledPoints& scene) {
    std::string buf;
    std::ostringstream header;
    header << "ply\nformat binary_little_endian 1.0\n"
           << "element vertex " << scene.cloud.size() << "\n"
           << "property float x\nproperty float y\nproperty float z\n"
           << "property int instance_id\nproperty int class_id\nend_header\n";
    buf = header.str();
    for (std::size_t i = 0; i < scene.cloud.size(); ++i) {
        const Point3& p = scene.cloud.points[i];
        ply::append_f32(buf, p.x);
        ply::append_f32(buf, p.y);
        ply::append_f32(buf, p.z);
        ply::append_i32(buf, scene.instance_ids[i]);
        ply::append_i32(buf, scene.class_ids[i]);
    }
    write_file_atomic(path, buf);
}

}  // namespace vscene
