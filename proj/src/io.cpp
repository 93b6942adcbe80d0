#include "eit/io.hpp"

#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>

namespace eit::io {

namespace {

void check_keys(const Json& j, std::initializer_list<const char*> allowed, const char* what) {
  if (!j.is_object()) throw ConfigError(std::string(what) + ": expected a JSON object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, value] : j.items()) {
    if (!ok.count(key)) throw ConfigError(std::string(what) + ": unknown key '" + key + "'");
  }
}

template <class T>
void read_opt(const Json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("key '") + key + "': " + e.what());
  }
}

template <class T>
T read_req(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw ConfigError(std::string("missing key '") + key + "'");
  T out{};
  read_opt(j, key, out);
  return out;
}

const Json& child(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw ConfigError(std::string("missing key '") + key + "'");
  return j.at(key);
}

Json point(const Eigen::Vector2d& p) { return Json::array({p.x(), p.y()}); }

Eigen::Vector2d point_from(const Json& j) {
  if (!j.is_array() || j.size() != 2) throw ConfigError("expected a point [x, y]");
  try {
    return {j[0].get<double>(), j[1].get<double>()};
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("bad point: ") + e.what());
  }
}

Json vector_json(const Vector& v) { return Json(std::vector<double>(v.data(), v.data() + v.size())); }

Vector vector_from(const Json& j, const char* what) {
  if (!j.is_array()) throw ConfigError(std::string(what) + ": expected an array of numbers");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw ConfigError(std::string(what) + ": expected an array of numbers");
    v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  }
  return v;
}

}  // namespace

Json to_json(const Mesh& mesh) {
  Json nodes = Json::array(), tris = Json::array();
  for (Eigen::Index i = 0; i < mesh.num_nodes(); ++i) nodes.push_back(point(mesh.nodes().col(i)));
  for (Eigen::Index t = 0; t < mesh.num_triangles(); ++t) {
    tris.push_back({mesh.triangles()(0, t), mesh.triangles()(1, t), mesh.triangles()(2, t)});
  }
  return {{"nodes", nodes}, {"triangles", tris}, {"boundary", mesh.boundary_nodes()}};
}

MeshPtr mesh_from_json(const Json& j) {
  check_keys(j, {"nodes", "triangles", "boundary"}, "mesh");
  const Json& jn = child(j, "nodes");
  const Json& jt = child(j, "triangles");
  if (!jn.is_array() || !jt.is_array()) throw ConfigError("mesh: nodes and triangles must be arrays");
  Points P(2, static_cast<Eigen::Index>(jn.size()));
  for (std::size_t i = 0; i < jn.size(); ++i) P.col(static_cast<Eigen::Index>(i)) = point_from(jn[i]);
  Triangles T(3, static_cast<Eigen::Index>(jt.size()));
  for (std::size_t t = 0; t < jt.size(); ++t) {
    if (!jt[t].is_array() || jt[t].size() != 3) throw ConfigError("mesh: triangles need three indices");
    for (int k = 0; k < 3; ++k) {
      if (!jt[t][k].is_number_integer()) throw ConfigError("mesh: triangle indices must be integers");
      T(k, static_cast<Eigen::Index>(t)) = jt[t][k].get<int>();
    }
  }
  auto mesh = std::make_shared<const Mesh>(std::move(P), std::move(T));
  if (j.contains("boundary") && j.at("boundary").get<std::vector<int>>() != mesh->boundary_nodes()) {
    throw ConfigError("mesh: stored boundary does not match the triangulation");
  }
  return mesh;
}

Json to_json(const BoundaryArc& arc) { return {{"theta1", arc.theta1}, {"theta2", arc.theta2}}; }

BoundaryArc arc_from_json(const Json& j) {
  check_keys(j, {"theta1", "theta2", "full"}, "arc");
  if (j.contains("full") && j.at("full").get<bool>()) return BoundaryArc::whole();
  return BoundaryArc::between(read_req<double>(j, "theta1"), read_req<double>(j, "theta2"));
}

Json to_json(const PhantomSpec& phantom) {
  Json incs = Json::array();
  for (const auto& inc : phantom.inclusions) {
    Json ji;
    if (const auto* d = std::get_if<DiskShape>(&inc.shape)) {
      ji = {{"shape", "disk"}, {"center", point(d->center)}, {"radius", d->radius}};
    } else if (const auto* k = std::get_if<KiteShape>(&inc.shape)) {
      ji = {{"shape", "kite"}, {"center", point(k->center)}, {"scale", k->scale}, {"rotation", k->rotation}};
    } else if (const auto* b = std::get_if<BumpShape>(&inc.shape)) {
      ji = {{"shape", "bump"},
            {"center", point(b->center)},
            {"radius", b->radius},
            {"profile", b->profile == BumpProfile::Quintic ? "quintic" : "quartic"}};
    }
    ji["contrast"] = inc.contrast;
    incs.push_back(ji);
  }
  return {{"background", phantom.background}, {"inclusions", incs}};
}

PhantomSpec phantom_from_json(const Json& j) {
  check_keys(j, {"preset", "background", "inclusions", "contrast"}, "phantom");
  PhantomSpec spec;
  if (j.contains("preset")) {
    const auto name = read_req<std::string>(j, "preset");
    double contrast = 4.0;
    read_opt(j, "contrast", contrast);
    if (name == "circular") {
      spec = circular_phantom(contrast);
    } else if (name == "kite") {
      spec = kite_phantom(contrast);
    } else if (name == "multi_bump") {
      spec = multi_bump_phantom();
    } else {
      throw ConfigError("phantom: unknown preset '" + name + "'");
    }
    read_opt(j, "background", spec.background);
    return spec;
  }
  read_opt(j, "background", spec.background);
  if (!j.contains("inclusions") || !j.at("inclusions").is_array()) {
    throw ConfigError("phantom: needs a preset or an inclusions array");
  }
  for (const auto& ji : j.at("inclusions")) {
    const auto shape = read_req<std::string>(ji, "shape");
    Inclusion inc;
    if (shape == "disk") {
      check_keys(ji, {"shape", "center", "radius", "contrast"}, "disk inclusion");
      DiskShape d;
      if (ji.contains("center")) d.center = point_from(ji.at("center"));
      read_opt(ji, "radius", d.radius);
      inc.shape = d;
    } else if (shape == "kite") {
      check_keys(ji, {"shape", "center", "scale", "rotation", "contrast"}, "kite inclusion");
      KiteShape k;
      if (ji.contains("center")) k.center = point_from(ji.at("center"));
      read_opt(ji, "scale", k.scale);
      read_opt(ji, "rotation", k.rotation);
      inc.shape = k;
    } else if (shape == "bump") {
      check_keys(ji, {"shape", "center", "radius", "profile", "contrast"}, "bump inclusion");
      BumpShape b;
      if (ji.contains("center")) b.center = point_from(ji.at("center"));
      read_opt(ji, "radius", b.radius);
      std::string profile = "quartic";
      read_opt(ji, "profile", profile);
      if (profile == "quartic") {
        b.profile = BumpProfile::Quartic;
      } else if (profile == "quintic") {
        b.profile = BumpProfile::Quintic;
      } else {
        throw ConfigError("bump inclusion: unknown profile '" + profile + "'");
      }
      inc.shape = b;
    } else {
      throw ConfigError("phantom: unknown shape '" + shape + "'");
    }
    inc.contrast = read_req<double>(ji, "contrast");
    spec.inclusions.push_back(inc);
  }
  return spec;
}

Json to_json(const Region& region) {
  Json disks = Json::array(), polys = Json::array();
  for (const auto& d : region.disks) disks.push_back({{"center", point(d.center)}, {"radius", d.radius}});
  for (const auto& p : region.polygons) {
    Json jp = Json::array();
    for (Eigen::Index i = 0; i < p.cols(); ++i) jp.push_back(point(p.col(i)));
    polys.push_back(jp);
  }
  return {{"disks", disks}, {"polygons", polys}};
}

Region region_from_json(const Json& j) {
  check_keys(j, {"disks", "polygons"}, "region");
  Region r;
  if (j.contains("disks")) {
    for (const auto& jd : j.at("disks")) {
      check_keys(jd, {"center", "radius"}, "region disk");
      r.disks.push_back({point_from(child(jd, "center")), read_req<double>(jd, "radius")});
    }
  }
  if (j.contains("polygons")) {
    for (const auto& jp : j.at("polygons")) {
      if (!jp.is_array()) throw ConfigError("region polygon must be an array of points");
      Points p(2, static_cast<Eigen::Index>(jp.size()));
      for (std::size_t i = 0; i < jp.size(); ++i) p.col(static_cast<Eigen::Index>(i)) = point_from(jp[i]);
      r.polygons.push_back(std::move(p));
    }
  }
  return r;
}

Json to_json(const PriorMask& prior) {
  return {{"region", prior.region ? to_json(*prior.region) : Json(nullptr)},
          {"mu_in", prior.mu_in},
          {"mu_out", prior.mu_out},
          {"dilation", prior.dilation}};
}

PriorMask prior_from_json(const Json& j, PriorMask p) {
  check_keys(j, {"region", "phantom", "mu_in", "mu_out", "dilation"}, "prior");
  if (j.contains("region") && j.contains("phantom")) throw ConfigError("prior: give either region or phantom");
  if (j.contains("region")) {
    p.region = j.at("region").is_null() ? std::nullopt : std::optional<Region>(region_from_json(j.at("region")));
  }
  if (j.contains("phantom")) p.region = phantom_region(phantom_from_json(j.at("phantom")));
  read_opt(j, "mu_in", p.mu_in);
  read_opt(j, "mu_out", p.mu_out);
  read_opt(j, "dilation", p.dilation);
  p.validate();
  return p;
}

Json to_json(const DescentParams& d) {
  return {{"c", d.c},
          {"s_min", d.s_min},
          {"s_max", d.s_max},
          {"s_stop", d.s_stop},
          {"memory", d.memory},
          {"tau", d.tau},
          {"max_iters", d.max_iters},
          {"refinement",
           {{"enabled", d.refinement.enabled},
            {"fraction", d.refinement.fraction},
            {"every", d.refinement.every},
            {"max_rounds", d.refinement.max_rounds}}}};
}

DescentParams descent_from_json(const Json& j, DescentParams d) {
  check_keys(j, {"c", "s_min", "s_max", "s_stop", "memory", "tau", "max_iters", "refinement"}, "descent");
  read_opt(j, "c", d.c);
  read_opt(j, "s_min", d.s_min);
  read_opt(j, "s_max", d.s_max);
  read_opt(j, "s_stop", d.s_stop);
  read_opt(j, "memory", d.memory);
  read_opt(j, "tau", d.tau);
  read_opt(j, "max_iters", d.max_iters);
  if (j.contains("refinement")) {
    const Json& r = j.at("refinement");
    check_keys(r, {"enabled", "fraction", "every", "max_rounds"}, "refinement");
    read_opt(r, "enabled", d.refinement.enabled);
    read_opt(r, "fraction", d.refinement.fraction);
    read_opt(r, "every", d.refinement.every);
    read_opt(r, "max_rounds", d.refinement.max_rounds);
  }
  d.validate();
  return d;
}

Json to_json(const ReconConfig& c) {
  return {{"alpha", c.alpha}, {"prior", to_json(c.prior)}, {"descent", to_json(c.descent)}};
}

ReconConfig recon_config_from_json(const Json& j, ReconConfig c) {
  check_keys(j, {"alpha", "prior", "descent"}, "reconstruction config");
  read_opt(j, "alpha", c.alpha);
  if (j.contains("prior")) c.prior = prior_from_json(j.at("prior"), c.prior);
  if (j.contains("descent")) c.descent = descent_from_json(j.at("descent"), c.descent);
  c.validate();
  return c;
}

Json to_json(const TVConfig& c) { return {{"alpha", c.alpha}, {"b", c.b}, {"descent", to_json(c.descent)}}; }

TVConfig tv_config_from_json(const Json& j, TVConfig c) {
  check_keys(j, {"alpha", "b", "descent"}, "TV config");
  read_opt(j, "alpha", c.alpha);
  read_opt(j, "b", c.b);
  if (j.contains("descent")) c.descent = descent_from_json(j.at("descent"), c.descent);
  c.validate();
  return c;
}

Json to_json(const NeumannPattern& p) {
  return {{"kind", p.kind == NeumannPattern::Kind::Cosine ? "cos" : "sin"}, {"n", p.n}};
}

NeumannPattern pattern_from_json(const Json& j, const BoundaryArc& arc) {
  check_keys(j, {"kind", "n"}, "pattern");
  NeumannPattern p;
  const auto kind = read_req<std::string>(j, "kind");
  if (kind == "cos") {
    p.kind = NeumannPattern::Kind::Cosine;
  } else if (kind == "sin") {
    p.kind = NeumannPattern::Kind::Sine;
  } else {
    throw ConfigError("pattern: kind must be cos or sin");
  }
  p.n = read_req<int>(j, "n");
  if (p.n < 1) throw ConfigError("pattern: n must be positive");
  p.arc = arc;
  return p;
}

Json to_json(const CauchyDataSet& d) {
  Json pats = Json::array(), dir = Json::array();
  for (const auto& p : d.patterns) pats.push_back(to_json(p));
  for (const auto& f : d.dirichlet) dir.push_back(vector_json(f));
  Json j = {{"arc", to_json(d.arc)},     {"patterns", pats},          {"theta", vector_json(d.theta)},
            {"dirichlet", dir},          {"noise_level", d.noise_level}, {"noise_std", d.noise_std},
            {"seed", d.seed}};
  if (d.phantom) j["phantom"] = to_json(*d.phantom);
  return j;
}

CauchyDataSet dataset_from_json(const Json& j) {
  check_keys(j, {"arc", "patterns", "theta", "dirichlet", "noise_level", "noise_std", "seed", "phantom"}, "dataset");
  CauchyDataSet d;
  d.arc = arc_from_json(child(j, "arc"));
  for (const auto& jp : child(j, "patterns")) d.patterns.push_back(pattern_from_json(jp, d.arc));
  d.theta = vector_from(child(j, "theta"), "dataset theta");
  for (const auto& jf : child(j, "dirichlet")) {
    d.dirichlet.push_back(vector_from(jf, "dataset dirichlet"));
    if (d.dirichlet.back().size() != d.theta.size()) throw ConfigError("dataset: sample count mismatch");
  }
  if (d.dirichlet.size() != d.patterns.size() || d.patterns.empty()) {
    throw ConfigError("dataset: need one Dirichlet vector per pattern");
  }
  read_opt(j, "noise_level", d.noise_level);
  read_opt(j, "noise_std", d.noise_std);
  read_opt(j, "seed", d.seed);
  if (j.contains("phantom")) d.phantom = phantom_from_json(j.at("phantom"));
  return d;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::filesystem::path& path, std::string_view text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
}

Json read_json(const std::filesystem::path& path) {
  try {
    return Json::parse(read_text(path));
  } catch (const Json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

void write_json(const std::filesystem::path& path, const Json& j) { write_text(path, j.dump(2) + "\n"); }

std::string field_csv(const Field& field) {
  std::string out = "node_index,value\n";
  char buf[64];
  for (Eigen::Index i = 0; i < field.values.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%ld,%.17g\n", static_cast<long>(i), field.values[i]);
    out += buf;
  }
  return out;
}

std::string field_vtk(const Field& field, const std::string& name) {
  const Mesh& mesh = *field.mesh;
  std::ostringstream os;
  os.precision(17);
  os << "# vtk DataFile Version 3.0\n" << name << "\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  os << "POINTS " << mesh.num_nodes() << " double\n";
  for (Eigen::Index i = 0; i < mesh.num_nodes(); ++i) os << mesh.nodes()(0, i) << ' ' << mesh.nodes()(1, i) << " 0\n";
  const auto nt = mesh.num_triangles();
  os << "CELLS " << nt << ' ' << 4 * nt << '\n';
  for (Eigen::Index t = 0; t < nt; ++t) {
    os << "3 " << mesh.triangles()(0, t) << ' ' << mesh.triangles()(1, t) << ' ' << mesh.triangles()(2, t) << '\n';
  }
  os << "CELL_TYPES " << nt << '\n';
  for (Eigen::Index t = 0; t < nt; ++t) os << "5\n";
  os << "POINT_DATA " << mesh.num_nodes() << "\nSCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
  for (Eigen::Index i = 0; i < mesh.num_nodes(); ++i) os << field.values[i] << '\n';
  return os.str();
}

std::string diagnostics_csv(const std::vector<IterationRecord>& log) {
  std::string out = "i,psi,discrepancy,penalty,step,backtracks,nnz,nodes\n";
  char buf[256];
  for (const auto& r : log) {
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g,%.17g,%d,%ld,%ld\n", r.iteration, r.psi, r.discrepancy,
                  r.penalty, r.step, r.backtracks, static_cast<long>(r.nnz), static_cast<long>(r.nodes));
    out += buf;
  }
  return out;
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string hex64(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
  return buf;
}

std::string file_hash(const std::filesystem::path& path) { return hex64(fnv1a64(read_text(path))); }

}  // namespace eit::io
