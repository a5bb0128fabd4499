#include "tmm/snapshot.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>
#include <openssl/evp.h>

#include "tmm/error.hpp"

namespace tmm {

namespace pt = boost::property_tree;

std::size_t Snapshot::vertex_count() const {
  std::size_t n = 0;
  for (const auto& m : meshes_) n += m.vertex_count();
  return n;
}

std::size_t Snapshot::triangle_count() const {
  std::size_t n = 0;
  for (const auto& m : meshes_) n += m.triangle_count();
  return n;
}

bool operator==(const Snapshot& a, const Snapshot& b) {
  return a.id_ == b.id_ && a.timestamp_ == b.timestamp_ && a.anchor_pose_ == b.anchor_pose_ &&
         a.meshes_ == b.meshes_;
}

Snapshot make_snapshot(std::vector<Mesh> meshes, Timestamp timestamp,
                       const RigidTransform& anchor) {
  Snapshot s;
  s.meshes_ = std::move(meshes);
  s.timestamp_ = timestamp;
  s.anchor_pose_ = anchor;
  s.id_ = content_hash(serialize_snapshot(s));
  return s;
}

Snapshot capture_snapshot(std::span<const Mesh> live_meshes, const RigidTransform& anchor,
                          Timestamp now) {
  return make_snapshot(std::vector<Mesh>(live_meshes.begin(), live_meshes.end()), now, anchor);
}

Snapshot apply(const RigidTransform& motion, const Snapshot& s) {
  std::vector<Mesh> moved;
  moved.reserve(s.meshes().size());
  for (const auto& m : s.meshes()) moved.push_back(apply(motion, m));
  return make_snapshot(std::move(moved), s.timestamp(), s.anchor_pose());
}

std::string content_hash(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorCode::StorageFailure, "SHA-256 digest failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned i = 0; i < 8; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xF]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Writing

namespace {

void append_double(std::string& out, double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, r.ptr);
}

void append_uint(std::string& out, std::uint64_t v) {
  char buf[24];
  const auto r = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, r.ptr);
}

void append_attr(std::string& out, const char* name, double v) {
  out += ' ';
  out += name;
  out += "=\"";
  append_double(out, v);
  out += '"';
}

}  // namespace

std::string serialize_snapshot(const Snapshot& s) {
  std::string out;
  out.reserve(256 + s.vertex_count() * 64 + s.triangle_count() * 24);
  out += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out += "<TimeMachineSnapshot version=\"";
  append_uint(out, kSnapshotFormatVersion);
  out += "\">\n";
  out += "  <Timestamp utc=\"" + s.timestamp().to_iso8601() + "\"/>\n";
  out += "  <AnchorPose>\n    <Rotation";
  static const char* kRotNames[3][3] = {
      {"m00", "m01", "m02"}, {"m10", "m11", "m12"}, {"m20", "m21", "m22"}};
  const auto& r = s.anchor_pose().rotation();
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) append_attr(out, kRotNames[i][j], r(i, j));
  }
  out += "/>\n    <Translation";
  const auto& t = s.anchor_pose().translation();
  append_attr(out, "x", t.x());
  append_attr(out, "y", t.y());
  append_attr(out, "z", t.z());
  out += "/>\n  </AnchorPose>\n";

  for (const auto& mesh : s.meshes()) {
    out += "  <Mesh>\n    <Vertices count=\"";
    append_uint(out, mesh.vertex_count());
    out += "\">";
    bool first = true;
    for (const auto& v : mesh.vertices()) {
      for (int k = 0; k < 3; ++k) {
        if (!first) out += ' ';
        first = false;
        append_double(out, v[k]);
      }
    }
    out += "</Vertices>\n    <Triangles count=\"";
    append_uint(out, mesh.triangle_count());
    out += "\">";
    first = true;
    for (const auto& tri : mesh.triangles()) {
      for (auto idx : tri) {
        if (!first) out += ' ';
        first = false;
        append_uint(out, idx);
      }
    }
    out += "</Triangles>\n  </Mesh>\n";
  }
  out += "</TimeMachineSnapshot>\n";
  return out;
}

// ---------------------------------------------------------------------------
// Reading

namespace {

[[noreturn]] void schema_error(const std::string& what) {
  throw Error(ErrorCode::SchemaViolation, what);
}

const pt::ptree& require_child(const pt::ptree& node, const std::string& name) {
  const auto child = node.get_child_optional(name);
  if (!child) schema_error("missing element <" + name + ">");
  return *child;
}

std::string require_attr(const pt::ptree& node, const std::string& element,
                         const std::string& name) {
  const auto attr = node.get_optional<std::string>("<xmlattr>." + name);
  if (!attr) schema_error("<" + element + "> is missing attribute '" + name + "'");
  return *attr;
}

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; }

template <typename T>
T parse_number(std::string_view token, const std::string& context) {
  T value{};
  const auto* end = token.data() + token.size();
  const auto r = std::from_chars(token.data(), end, value);
  if (r.ec != std::errc() || r.ptr != end) {
    schema_error("bad number '" + std::string(token) + "' in " + context);
  }
  return value;
}

double parse_finite(std::string_view token, const std::string& context) {
  const double v = parse_number<double>(token, context);
  if (!std::isfinite(v)) schema_error("non-finite value in " + context);
  return v;
}

/// Splits a whitespace-separated payload, calling fn(token) for each.
template <typename Fn>
void for_each_token(std::string_view text, Fn&& fn) {
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_space(text[i])) ++i;
    if (i == text.size()) break;
    std::size_t j = i;
    while (j < text.size() && !is_space(text[j])) ++j;
    fn(text.substr(i, j - i));
    i = j;
  }
}

std::size_t parse_count(const pt::ptree& node, const std::string& element) {
  return parse_number<std::size_t>(require_attr(node, element, "count"), element + " count");
}

Mesh parse_mesh(const pt::ptree& node, std::size_t mesh_index) {
  const std::string ctx = "mesh " + std::to_string(mesh_index);
  const auto& vnode = require_child(node, "Vertices");
  const auto& tnode = require_child(node, "Triangles");
  const std::size_t vcount = parse_count(vnode, "Vertices");
  const std::size_t tcount = parse_count(tnode, "Triangles");

  std::vector<double> coords;
  coords.reserve(3 * vcount);
  for_each_token(vnode.data(), [&](std::string_view tok) {
    coords.push_back(parse_finite(tok, ctx + " vertices"));
  });
  if (coords.size() != 3 * vcount) {
    schema_error(ctx + ": expected " + std::to_string(3 * vcount) + " vertex numbers, found " +
                 std::to_string(coords.size()));
  }

  std::vector<std::uint32_t> indices;
  indices.reserve(3 * tcount);
  for_each_token(tnode.data(), [&](std::string_view tok) {
    indices.push_back(parse_number<std::uint32_t>(tok, ctx + " triangles"));
  });
  if (indices.size() != 3 * tcount) {
    schema_error(ctx + ": expected " + std::to_string(3 * tcount) + " triangle indices, found " +
                 std::to_string(indices.size()));
  }

  std::vector<Point3> verts(vcount);
  for (std::size_t i = 0; i < vcount; ++i) {
    verts[i] = Point3(coords[3 * i], coords[3 * i + 1], coords[3 * i + 2]);
  }
  std::vector<Triangle> tris(tcount);
  for (std::size_t i = 0; i < tcount; ++i) {
    tris[i] = {indices[3 * i], indices[3 * i + 1], indices[3 * i + 2]};
  }
  try {
    return make_mesh(std::move(verts), std::move(tris));
  } catch (const Error& e) {
    schema_error(ctx + ": " + e.what());
  }
}

}  // namespace

Snapshot deserialize_snapshot(std::string_view doc) {
  pt::ptree tree;
  try {
    std::istringstream in{std::string(doc)};
    pt::read_xml(in, tree);
  } catch (const pt::xml_parser_error& e) {
    throw Error(ErrorCode::MalformedDocument, e.what());
  }

  const auto root = tree.get_child_optional("TimeMachineSnapshot");
  if (!root) {
    throw Error(ErrorCode::MalformedDocument, "root element is not <TimeMachineSnapshot>");
  }
  const std::string version = require_attr(*root, "TimeMachineSnapshot", "version");
  if (version != std::to_string(kSnapshotFormatVersion)) {
    throw Error(ErrorCode::UnsupportedVersion, "unsupported snapshot version '" + version + "'");
  }

  const auto& ts_node = require_child(*root, "Timestamp");
  Timestamp ts;
  try {
    ts = Timestamp::parse_iso8601(require_attr(ts_node, "Timestamp", "utc"));
  } catch (const Error& e) {
    schema_error(e.what());
  }

  const auto& pose = require_child(*root, "AnchorPose");
  const auto& rot = require_child(pose, "Rotation");
  const auto& tra = require_child(pose, "Translation");
  Matrix3 r;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      const std::string name = "m" + std::to_string(i) + std::to_string(j);
      r(i, j) = parse_finite(require_attr(rot, "Rotation", name), "Rotation");
    }
  }
  const Vector3 t(parse_finite(require_attr(tra, "Translation", "x"), "Translation"),
                  parse_finite(require_attr(tra, "Translation", "y"), "Translation"),
                  parse_finite(require_attr(tra, "Translation", "z"), "Translation"));
  if (!is_rotation(r)) schema_error("anchor rotation is not a proper rotation");

  std::vector<Mesh> meshes;
  for (const auto& [name, child] : *root) {
    if (name == "Mesh") meshes.push_back(parse_mesh(child, meshes.size()));
  }
  return make_snapshot(std::move(meshes), ts, rigid_from_parts_unchecked(r, t));
}

}  // namespace tmm
