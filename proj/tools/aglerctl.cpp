// Command-line front end: parses JSON problem instances, dispatches to the
// library, and emits JSON results with certificates on stdout.
#include <fstream>
#include <iostream>
#include <set>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "agler/json_io.hpp"
#include "agler/multiplier.hpp"
#include "agler/solver.hpp"
#include "agler/version.hpp"

namespace {

using agler::Complex;
using agler::Error;
using agler::ErrorCode;
using agler::InstanceDocument;
using agler::Kernel;
using agler::PointSet;
using agler::ScalarFunction;
using nlohmann::json;

struct Flags {
  double tol = -1.0;  // negative: use the instance/module default
  int grid = 101;
  double epsilon = 1e-6;
  long long seed = -1;
  int theta_grid = -1;
  int truncation = -1;
};

struct Outcome {
  std::string status = "ok";
  json payload = json::object();
  json certificates = json::object();
  int exit_code = 0;
};

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::unbounded_multiplier:
      return 1;
    case ErrorCode::numerical_failure:
    case ErrorCode::extension_failure:
    case ErrorCode::fit_failure:
      return 3;
    default:
      return 2;
  }
}

PointSet subset_or_all(const InstanceDocument& doc, const std::string& name) {
  auto it = doc.subsets.find(name);
  if (it == doc.subsets.end()) return doc.points;
  return doc.points.sublist(it->second);
}

PointSet required_subset(const InstanceDocument& doc, const std::string& name) {
  auto it = doc.subsets.find(name);
  if (it == doc.subsets.end()) {
    throw Error(ErrorCode::invalid_input,
                "instance needs subset '" + name + "'");
  }
  return doc.points.sublist(it->second);
}

ScalarFunction function_on(const InstanceDocument& doc, const std::string& name,
                           const PointSet& domain) {
  auto it = doc.functions.find(name);
  if (it == doc.functions.end()) {
    throw Error(ErrorCode::invalid_input,
                "instance needs function '" + name + "'");
  }
  return ScalarFunction::from_map(domain, it->second);
}

// The kernel a single-kernel command acts on: the first explicit kernel, the
// Szego kernel for the disc family, or the requested theta-slice for the
// annulus family.
Kernel active_kernel(const InstanceDocument& doc, const Flags& flags) {
  switch (doc.family.id) {
    case agler::FamilyId::explicit_list:
      return doc.kernels.front();
    case agler::FamilyId::disc: {
      const int n = doc.compression
                        ? static_cast<int>(doc.compression->gamma.size())
                        : 1;
      return agler::szego_kernel(n);
    }
    case agler::FamilyId::annulus: {
      const double theta = doc.compression ? doc.compression->theta : 0.0;
      const int trunc =
          flags.truncation > 0 ? flags.truncation : doc.family.annulus_truncation;
      return agler::annulus_kernel(doc.family.annulus_r, theta, trunc);
    }
  }
  throw Error(ErrorCode::invalid_input, "unknown family");
}

json eigenvalues_json(const agler::Matrix& m) {
  if (m.size() == 0) return json::array();
  Eigen::SelfAdjointEigenSolver<agler::Matrix> es(0.5 * (m + m.adjoint()),
                                                  Eigen::EigenvaluesOnly);
  json arr = json::array();
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    arr.push_back(es.eigenvalues()(i));
  }
  return arr;
}

json labels_json(const PointSet& set) {
  json arr = json::array();
  for (const auto& p : set.points()) arr.push_back(p.label);
  return arr;
}

Outcome run_gram(const InstanceDocument& doc, const Flags& flags) {
  const PointSet F = subset_or_all(doc, "F");
  const Kernel k = active_kernel(doc, flags);
  const agler::Matrix gram = agler::kernel_gram(k, F);
  Outcome out;
  out.payload["labels"] = labels_json(F);
  out.payload["n"] = k.dim();
  out.payload["matrix"] = agler::matrix_json(gram);
  out.certificates["eigenvalues"] = eigenvalues_json(gram);
  return out;
}

Outcome run_psd(const InstanceDocument& doc, const Flags& flags) {
  const PointSet F = subset_or_all(doc, "F");
  const Kernel k = active_kernel(doc, flags);
  const double tol = flags.tol >= 0.0 ? flags.tol : doc.tol_psd;
  const agler::PsdReport rep = agler::psd_check(agler::kernel_gram(k, F), tol);
  Outcome out;
  out.status = rep.is_psd ? "ok" : "infeasible";
  out.exit_code = rep.is_psd ? 0 : 1;
  out.payload["is_psd"] = rep.is_psd;
  out.payload["min_eigenvalue"] = rep.min_eigenvalue;
  out.payload["max_eigenvalue"] = rep.max_eigenvalue;
  out.certificates["min_eigenvalue"] = rep.min_eigenvalue;
  return out;
}

Outcome run_norm(const InstanceDocument& doc, const Flags& flags) {
  const PointSet F = subset_or_all(doc, "F");
  const Kernel k = active_kernel(doc, flags);
  const ScalarFunction f = function_on(doc, "f", F);
  const agler::NormResult res = agler::multiplier_norm(k, F, f);
  Outcome out;
  out.payload["value"] = res.value;
  out.payload["method"] =
      res.method == agler::NormMethod::pencil ? "pencil" : "bisection";
  json cert = json::array();
  for (Eigen::Index i = 0; i < res.certificate.size(); ++i) {
    cert.push_back(agler::complex_json(res.certificate(i)));
  }
  out.certificates["certificate"] = std::move(cert);
  return out;
}

Outcome run_qnorm(const InstanceDocument& doc, const Flags& flags) {
  const PointSet X = subset_or_all(doc, "X");
  const PointSet Y = required_subset(doc, "Y");
  const Kernel k = active_kernel(doc, flags);
  const ScalarFunction psi = doc.functions.count("psi")
                                 ? function_on(doc, "psi", Y)
                                 : function_on(doc, "g", Y);
  const double tol = flags.tol >= 0.0 ? flags.tol : doc.tol_quotient;
  const agler::QuotientResult res = agler::quotient_norm(k, X, Y, psi, tol);
  Outcome out;
  out.payload["value"] = res.value;
  out.payload["minimizer"] = agler::function_json(res.minimizer);
  out.payload["iterations"] = res.iterations;
  out.payload["gap"] = res.gap;
  out.certificates["gap"] = res.gap;
  return out;
}

Outcome run_compress(const InstanceDocument& doc, const Flags& flags) {
  if (!doc.compression) {
    throw Error(ErrorCode::invalid_input,
                "instance needs a 'compression' object");
  }
  const PointSet F = subset_or_all(doc, "F");
  const Kernel k = active_kernel(doc, flags);
  const agler::Point z = doc.points[doc.points.index_of(doc.compression->z)];
  const agler::CompressedKernel kp =
      agler::rank_one_compress(k, F, z, doc.compression->gamma);
  Outcome out;
  out.payload["labels"] = labels_json(F);
  out.payload["gram"] = agler::matrix_json(kp.gram);
  out.payload["projector"] = agler::matrix_json(kp.projector);
  out.payload["defect"] = kp.defect;
  out.certificates["defect"] = kp.defect;
  out.certificates["eigenvalues"] = eigenvalues_json(kp.gram);
  return out;
}

Outcome run_verify_family(const InstanceDocument& doc, const Flags& flags) {
  const PointSet F = subset_or_all(doc, "F");
  const std::uint64_t seed =
      flags.seed >= 0 ? static_cast<std::uint64_t>(flags.seed) : doc.seed;
  const agler::AxiomReport rep =
      agler::verify_family_axioms(doc.family, F, doc.samples, seed);
  auto verdict = [](const agler::AxiomVerdict& v) {
    return json{{"pass", v.pass}, {"detail", v.detail}};
  };
  Outcome out;
  out.payload["direct_sum_closure"] = verdict(rep.direct_sum_closure);
  out.payload["compression"] = verdict(rep.compression);
  out.payload["compression_verifiable"] = rep.compression_verifiable;
  out.payload["compression_max_residual"] = rep.compression_max_residual;
  out.payload["bounded_multipliers"] = verdict(rep.bounded_multipliers);
  out.payload["norm_bound"] = rep.norm_bound;
  out.payload["diagonal_nonzero"] = verdict(rep.diagonal_nonzero);
  out.payload["zero_diagonal_points"] = rep.zero_diagonal_points;
  out.payload["all_pass"] = rep.all_pass();
  out.status = rep.all_pass() ? "ok" : "infeasible";
  out.exit_code = rep.all_pass() ? 0 : 1;
  out.certificates["compression_max_residual"] = rep.compression_max_residual;
  return out;
}

Outcome run_pick(const InstanceDocument& doc, const Flags&) {
  const PointSet Y = subset_or_all(doc, "Y");
  const ScalarFunction g = function_on(doc, "g", Y);
  if (!doc.rho) {
    throw Error(ErrorCode::invalid_input, "instance needs a 'rho' value");
  }
  const agler::PickReport rep =
      agler::pick_feasible(doc.family, Y, g, *doc.rho);
  Outcome out;
  out.status = rep.feasible ? "ok" : "infeasible";
  out.exit_code = rep.feasible ? 0 : 1;
  out.payload["feasible"] = rep.feasible;
  out.payload["rho"] = *doc.rho;
  out.payload["certificates"] = agler::real_vector_json(rep.certificates);
  out.certificates["min_eigenvalues"] =
      agler::real_vector_json(rep.certificates);
  return out;
}

Outcome run_rho(const InstanceDocument& doc, const Flags& flags) {
  const PointSet Y = subset_or_all(doc, "Y");
  const ScalarFunction g = function_on(doc, "g", Y);
  const double tol = flags.tol >= 0.0 ? flags.tol : doc.tol_rho;
  const double value = agler::minimal_rho(doc.family, Y, g, tol);
  Outcome out;
  out.payload["value"] = value;
  return out;
}

Outcome run_extend(const InstanceDocument& doc, const Flags& flags) {
  agler::InterpolationInstance instance;
  instance.X = subset_or_all(doc, "X");
  instance.Y = required_subset(doc, "Y");
  instance.g = function_on(doc, "g", instance.Y);
  instance.family = doc.family;
  instance.rho = doc.rho;
  const agler::ExtensionResult res =
      agler::extend(instance, flags.epsilon, flags.grid);
  Outcome out;
  out.payload["f"] = agler::function_json(res.f);
  out.payload["rho_used"] = res.rho_used;
  out.payload["order"] = res.order;
  json steps = json::array();
  for (const auto& margins : res.step_margins) {
    steps.push_back(agler::real_vector_json(margins));
  }
  out.payload["step_margins"] = std::move(steps);
  out.payload["final_margins"] = agler::real_vector_json(res.final_margins);
  out.certificates["final_margins"] =
      agler::real_vector_json(res.final_margins);
  return out;
}

Outcome run_region(const InstanceDocument& doc, const Flags& flags) {
  if (!doc.z_label) {
    throw Error(ErrorCode::invalid_input, "instance needs a 'z' point label");
  }
  const agler::Point z = doc.points[doc.points.index_of(*doc.z_label)];
  PointSet X;
  if (doc.subsets.count("X")) {
    X = doc.points.sublist(doc.subsets.at("X"));
  } else {
    std::vector<agler::Point> rest;
    for (const auto& p : doc.points.points()) {
      if (p.label != z.label) rest.push_back(p);
    }
    X = PointSet(std::move(rest));
  }
  const ScalarFunction f = function_on(doc, "f", X);
  if (!doc.rho) {
    throw Error(ErrorCode::invalid_input, "instance needs a 'rho' value");
  }
  const agler::FeasibleRegion region =
      agler::one_point_region(doc.family, X, f, z, *doc.rho, flags.grid);
  Outcome out;
  out.payload["bounding_radius"] = region.bound_radius;
  out.payload["cell_size"] = region.base_cell_size;
  out.payload["refinement_depth"] = region.refinement_depth;
  out.payload["any_feasible"] = region.any_feasible();
  out.payload["feasible_radius"] = region.feasible_radius();
  json cells = json::array();
  for (const auto& c : region.cells) {
    if (!c.feasible) continue;
    cells.push_back(json{{"u", agler::complex_json(Complex(c.re, c.im))},
                         {"size", c.size},
                         {"margin", c.margin},
                         {"depth", c.depth}});
  }
  out.payload["feasible_cells"] = std::move(cells);
  out.status = region.any_feasible() ? "ok" : "infeasible";
  out.exit_code = region.any_feasible() ? 0 : 1;
  return out;
}

Outcome run_annulus_eval(const InstanceDocument& doc, const Flags& flags) {
  if (doc.family.id != agler::FamilyId::annulus) {
    throw Error(ErrorCode::invalid_input,
                "annulus-eval needs an annulus family");
  }
  if (!doc.eval) {
    throw Error(ErrorCode::invalid_input, "instance needs an 'eval' object");
  }
  const agler::Point& zp = doc.points[doc.points.index_of(doc.eval->z)];
  const agler::Point& wp = doc.points[doc.points.index_of(doc.eval->w)];
  if (!zp.coordinate || !wp.coordinate) {
    throw Error(ErrorCode::invalid_input,
                "'eval' points need coordinates");
  }
  const int trunc =
      flags.truncation > 0 ? flags.truncation : doc.family.annulus_truncation;
  const Complex value = agler::annulus_kernel_eval(
      doc.family.annulus_r, doc.eval->theta, *zp.coordinate, *wp.coordinate,
      trunc);
  Outcome out;
  out.payload["value"] = agler::complex_json(value);
  out.payload["r"] = doc.family.annulus_r;
  out.payload["theta"] = doc.eval->theta;
  out.payload["truncation"] = trunc;
  return out;
}

Outcome run_fit_compression(const InstanceDocument& doc, const Flags& flags) {
  if (doc.family.id != agler::FamilyId::annulus) {
    throw Error(ErrorCode::invalid_input,
                "fit-compression needs an annulus family");
  }
  if (!doc.compression) {
    throw Error(ErrorCode::invalid_input,
                "instance needs a 'compression' object");
  }
  if (doc.compression->gamma.size() != 1) {
    throw Error(ErrorCode::invalid_input,
                "annulus compressions are scalar: gamma must have length 1");
  }
  const PointSet F = subset_or_all(doc, "F");
  const int trunc =
      flags.truncation > 0 ? flags.truncation : doc.family.annulus_truncation;
  const Kernel k =
      agler::annulus_kernel(doc.family.annulus_r, doc.compression->theta, trunc);
  const agler::Point z = doc.points[doc.points.index_of(doc.compression->z)];
  const agler::CompressedKernel kp =
      agler::rank_one_compress(k, F, z, doc.compression->gamma);
  const int grid = flags.theta_grid > 0 ? flags.theta_grid : 512;
  const agler::CompressionFit fit = agler::fit_annulus_compression(
      kp.gram, F, doc.family.annulus_r, grid, trunc);
  Outcome out;
  out.payload["theta_best"] = fit.theta_best;
  out.payload["residual"] = fit.residual;
  out.payload["phi"] = agler::function_json(fit.phi);
  json profile = json::array();
  for (const auto& [theta, res] : fit.grid_profile) {
    profile.push_back(json::array({theta, res}));
  }
  out.payload["grid_profile"] = std::move(profile);
  out.certificates["residual"] = fit.residual;
  return out;
}

Outcome dispatch(const std::string& command, const InstanceDocument& doc,
                 const Flags& flags) {
  if (command == "gram") return run_gram(doc, flags);
  if (command == "psd") return run_psd(doc, flags);
  if (command == "norm") return run_norm(doc, flags);
  if (command == "qnorm") return run_qnorm(doc, flags);
  if (command == "compress") return run_compress(doc, flags);
  if (command == "verify-family") return run_verify_family(doc, flags);
  if (command == "pick") return run_pick(doc, flags);
  if (command == "rho") return run_rho(doc, flags);
  if (command == "extend") return run_extend(doc, flags);
  if (command == "region") return run_region(doc, flags);
  if (command == "annulus-eval") return run_annulus_eval(doc, flags);
  if (command == "fit-compression") return run_fit_compression(doc, flags);
  throw Error(ErrorCode::invalid_input, "unknown command '" + command + "'");
}

void emit(const json& result, const std::string& output_path) {
  if (output_path.empty()) {
    agler::write_json(std::cout, result);
  } else {
    std::ofstream out(output_path);
    agler::write_json(out, result);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pick-type interpolation over families of PSD kernels"};
  std::string command;
  std::string instance_path;
  std::string output_path;
  Flags flags;

  app.add_option("command", command, "gram|psd|norm|qnorm|compress|verify-family|pick|rho|extend|region|annulus-eval|fit-compression")
      ->required();
  app.add_option("instance", instance_path, "path to the JSON instance")
      ->required();
  app.add_option("--tol", flags.tol, "tolerance override");
  app.add_option("--grid", flags.grid, "region grid resolution");
  app.add_option("--epsilon", flags.epsilon, "extension inflation factor");
  app.add_option("--seed", flags.seed, "seed override");
  app.add_option("--theta-grid", flags.theta_grid, "fit theta grid size");
  app.add_option("--truncation", flags.truncation, "series truncation");
  app.add_option("--output", output_path, "write the result here instead of stdout");
  CLI11_PARSE(app, argc, argv);

  json result;
  result["command"] = command;
  result["version"] = agler::kVersion;

  int exit_code = 0;
  try {
    const InstanceDocument doc = agler::load_instance(instance_path);
    result["tolerances"] = json{{"psd", flags.tol >= 0.0 ? flags.tol : doc.tol_psd},
                                {"rank", doc.tol_rank},
                                {"quotient", flags.tol >= 0.0 ? flags.tol : doc.tol_quotient},
                                {"rho", flags.tol >= 0.0 ? flags.tol : doc.tol_rho}};
    const Outcome outcome = dispatch(command, doc, flags);
    result["status"] = outcome.status;
    result["payload"] = outcome.payload;
    result["certificates"] = outcome.certificates;
    exit_code = outcome.exit_code;
  } catch (const agler::FitFailure& e) {
    result["status"] = "error";
    json profile = json::array();
    for (const auto& [theta, res] : e.profile()) {
      profile.push_back(json::array({theta, res}));
    }
    result["error"] = json{{"code", agler::to_string(e.code())},
                           {"message", e.what()},
                           {"grid_profile", profile}};
    exit_code = exit_code_for(e.code());
  } catch (const agler::ExtensionFailure& e) {
    result["status"] = "error";
    result["error"] = json{{"code", agler::to_string(e.code())},
                           {"message", e.what()},
                           {"offending_point", e.offending_point()},
                           {"partial", agler::function_json(e.partial())},
                           {"worst_margins",
                            agler::real_vector_json(e.worst_margins())}};
    exit_code = exit_code_for(e.code());
  } catch (const Error& e) {
    const bool schema =
        std::string(e.what()).rfind("schema:", 0) == 0;
    const bool unbounded = e.code() == ErrorCode::unbounded_multiplier;
    result["status"] = unbounded ? "infeasible" : "error";
    result["error"] = json{{"code", schema ? "schema" : agler::to_string(e.code())},
                           {"message", e.what()}};
    exit_code = exit_code_for(e.code());
  } catch (const nlohmann::json::exception& e) {
    result["status"] = "error";
    result["error"] = json{{"code", "schema"}, {"message", e.what()}};
    exit_code = 2;
  } catch (const std::exception& e) {
    result["status"] = "error";
    result["error"] = json{{"code", "internal"}, {"message", e.what()}};
    exit_code = 3;
  }

  emit(result, output_path);
  return exit_code;
}
