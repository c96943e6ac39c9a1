#include "agler/json_io.hpp"

#include <cstdio>
#include <fstream>
#include <ostream>

namespace agler {

namespace {

using nlohmann::json;

[[noreturn]] void schema_error(const std::string& what) {
  throw Error(ErrorCode::invalid_input, "schema: " + what);
}

const json& require(const json& doc, const char* key) {
  auto it = doc.find(key);
  if (it == doc.end()) schema_error(std::string("missing field '") + key + "'");
  return *it;
}

double number_at(const json& v, const std::string& where) {
  if (!v.is_number()) schema_error(where + " must be a number");
  return v.get<double>();
}

}  // namespace

Complex parse_complex(const json& v) {
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
    schema_error("complex values are [re, im] arrays");
  }
  return Complex(v[0].get<double>(), v[1].get<double>());
}

nlohmann::json complex_json(Complex z) {
  return json::array({z.real(), z.imag()});
}

nlohmann::json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      row.push_back(complex_json(m(i, j)));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

nlohmann::json real_vector_json(const std::vector<double>& v) {
  json arr = json::array();
  for (double x : v) arr.push_back(x);
  return arr;
}

nlohmann::json function_json(const ScalarFunction& f) {
  json obj = json::object();
  for (std::size_t i = 0; i < f.size(); ++i) {
    obj[f.domain()[i].label] = complex_json(f[i]);
  }
  return obj;
}

InstanceDocument parse_instance(const json& doc) {
  if (!doc.is_object()) schema_error("instance must be a JSON object");
  InstanceDocument out;

  // Points.
  const json& points = require(doc, "points");
  if (!points.is_array()) schema_error("'points' must be an array");
  std::vector<Point> pts;
  for (const json& p : points) {
    if (!p.is_object() || !p.contains("label") || !p["label"].is_string()) {
      schema_error("each point needs a string 'label'");
    }
    Point point;
    point.label = p["label"].get<std::string>();
    if (p.contains("coordinate")) {
      point.coordinate = parse_complex(p["coordinate"]);
    }
    pts.push_back(std::move(point));
  }
  try {
    out.points = PointSet(std::move(pts));
  } catch (const Error& e) {
    schema_error(e.what());
  }

  // Subsets of declared labels.
  if (doc.contains("subsets")) {
    const json& subsets = doc["subsets"];
    if (!subsets.is_object()) schema_error("'subsets' must be an object");
    for (const auto& [name, labels] : subsets.items()) {
      if (!labels.is_array()) schema_error("subset '" + name + "' must be an array");
      std::vector<std::string> list;
      for (const json& l : labels) {
        if (!l.is_string()) schema_error("subset labels must be strings");
        const std::string label = l.get<std::string>();
        if (!out.points.contains(label)) {
          schema_error("subset '" + name + "' references undeclared point '" +
                       label + "'");
        }
        list.push_back(label);
      }
      out.subsets[name] = std::move(list);
    }
  }

  // Functions.
  if (doc.contains("functions")) {
    const json& functions = doc["functions"];
    if (!functions.is_object()) schema_error("'functions' must be an object");
    for (const auto& [name, values] : functions.items()) {
      if (!values.is_object()) {
        schema_error("function '" + name + "' must map labels to [re, im]");
      }
      std::map<std::string, Complex> map;
      for (const auto& [label, value] : values.items()) {
        if (!out.points.contains(label)) {
          schema_error("function '" + name + "' references undeclared point '" +
                       label + "'");
        }
        map[label] = parse_complex(value);
      }
      out.functions[name] = std::move(map);
    }
  }

  // Explicit kernels.
  if (doc.contains("kernels")) {
    const json& kernels = doc["kernels"];
    if (!kernels.is_array()) schema_error("'kernels' must be an array");
    for (const json& kj : kernels) {
      if (!kj.is_object()) schema_error("each kernel must be an object");
      const int n = static_cast<int>(number_at(require(kj, "n"), "kernel 'n'"));
      if (n < 1) schema_error("kernel 'n' must be >= 1");
      ExplicitTable table(out.points, n);
      const json& entries = require(kj, "entries");
      if (!entries.is_array()) schema_error("kernel 'entries' must be an array");
      for (const json& e : entries) {
        const std::string x = require(e, "x").get<std::string>();
        const std::string y = require(e, "y").get<std::string>();
        if (!out.points.contains(x) || !out.points.contains(y)) {
          schema_error("kernel entry references an undeclared point");
        }
        if (out.points.index_of(x) > out.points.index_of(y)) {
          schema_error("kernel entries must satisfy x <= y in label order; "
                       "the mirrored block is the adjoint");
        }
        const json& mj = require(e, "matrix");
        if (!mj.is_array() || static_cast<int>(mj.size()) != n) {
          schema_error("kernel entry matrix must be n x n");
        }
        Matrix m(n, n);
        for (int i = 0; i < n; ++i) {
          if (!mj[i].is_array() || static_cast<int>(mj[i].size()) != n) {
            schema_error("kernel entry matrix must be n x n");
          }
          for (int j = 0; j < n; ++j) m(i, j) = parse_complex(mj[i][j]);
        }
        table.set(x, y, std::move(m));
      }
      out.kernels.push_back(Kernel::from_table(std::move(table)));
    }
  }

  // Family.
  const json& family = require(doc, "family");
  const std::string type = require(family, "type").get<std::string>();
  if (type == "disc") {
    const int n_max =
        family.contains("n_max")
            ? static_cast<int>(number_at(family["n_max"], "'n_max'"))
            : 1;
    out.family = disc_family(n_max);
  } else if (type == "annulus") {
    const double r = number_at(require(family, "r"), "'r'");
    const int grid =
        family.contains("theta_grid")
            ? static_cast<int>(number_at(family["theta_grid"], "'theta_grid'"))
            : 64;
    const int trunc =
        family.contains("truncation")
            ? static_cast<int>(number_at(family["truncation"], "'truncation'"))
            : 200;
    out.family = annulus_family(r, grid, trunc);
  } else if (type == "explicit") {
    if (out.kernels.empty()) {
      schema_error("explicit family needs a nonempty 'kernels' list");
    }
    out.family = explicit_family(out.kernels);
  } else {
    schema_error("family type must be 'disc', 'annulus' or 'explicit'");
  }

  if (doc.contains("rho")) out.rho = number_at(doc["rho"], "'rho'");
  if (doc.contains("z")) {
    if (!doc["z"].is_string()) schema_error("'z' must be a point label");
    out.z_label = doc["z"].get<std::string>();
    if (!out.points.contains(*out.z_label)) {
      schema_error("'z' references undeclared point '" + *out.z_label + "'");
    }
  }

  if (doc.contains("eval")) {
    const json& ev = doc["eval"];
    InstanceDocument::EvalSpec spec;
    spec.z = require(ev, "z").get<std::string>();
    spec.w = require(ev, "w").get<std::string>();
    if (ev.contains("theta")) spec.theta = number_at(ev["theta"], "'theta'");
    if (!out.points.contains(spec.z) || !out.points.contains(spec.w)) {
      schema_error("'eval' references an undeclared point");
    }
    out.eval = std::move(spec);
  }

  if (doc.contains("compression")) {
    const json& comp = doc["compression"];
    InstanceDocument::CompressionRequest req;
    req.z = require(comp, "z").get<std::string>();
    if (!out.points.contains(req.z)) {
      schema_error("'compression' references undeclared point '" + req.z + "'");
    }
    const json& gj = require(comp, "gamma");
    if (!gj.is_array() || gj.empty()) {
      schema_error("'compression.gamma' must be a nonempty array of [re, im]");
    }
    req.gamma = Vector(gj.size());
    for (std::size_t i = 0; i < gj.size(); ++i) {
      req.gamma(static_cast<Eigen::Index>(i)) = parse_complex(gj[i]);
    }
    if (comp.contains("theta")) {
      req.theta = number_at(comp["theta"], "'compression.theta'");
    }
    out.compression = std::move(req);
  }

  if (doc.contains("seed")) {
    if (!doc["seed"].is_number_integer() && !doc["seed"].is_number_unsigned()) {
      schema_error("'seed' must be an integer");
    }
    out.seed = doc["seed"].get<std::uint64_t>();
  }
  if (doc.contains("samples")) {
    out.samples = static_cast<int>(number_at(doc["samples"], "'samples'"));
  }

  if (doc.contains("tolerances")) {
    const json& tols = doc["tolerances"];
    if (!tols.is_object()) schema_error("'tolerances' must be an object");
    if (tols.contains("psd")) out.tol_psd = number_at(tols["psd"], "'psd'");
    if (tols.contains("rank")) out.tol_rank = number_at(tols["rank"], "'rank'");
    if (tols.contains("quotient")) {
      out.tol_quotient = number_at(tols["quotient"], "'quotient'");
    }
    if (tols.contains("rho")) out.tol_rho = number_at(tols["rho"], "'rho'");
  }

  return out;
}

InstanceDocument load_instance(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::invalid_input,
                "schema: cannot open instance file '" + path + "'");
  }
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::invalid_input,
                std::string("schema: malformed JSON: ") + e.what());
  }
  return parse_instance(doc);
}

namespace {

void write_value(std::ostream& os, const json& v) {
  switch (v.type()) {
    case json::value_t::object: {
      os << '{';
      bool first = true;
      for (const auto& [key, val] : v.items()) {
        if (!first) os << ',';
        first = false;
        os << json(key).dump() << ':';
        write_value(os, val);
      }
      os << '}';
      break;
    }
    case json::value_t::array: {
      os << '[';
      bool first = true;
      for (const json& item : v) {
        if (!first) os << ',';
        first = false;
        write_value(os, item);
      }
      os << ']';
      break;
    }
    case json::value_t::number_float: {
      char buf[64];
      std::snprintf(buf, sizeof(buf), "%.17g", v.get<double>());
      os << buf;
      break;
    }
    default:
      os << v.dump();
      break;
  }
}

}  // namespace

void write_json(std::ostream& os, const json& value) {
  write_value(os, value);
  os << '\n';
}

}  // namespace agler
