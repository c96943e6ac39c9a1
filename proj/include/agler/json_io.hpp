// JSON instance parsing and result serialization for the CLI. Complex
// numbers serialize as [re, im]; matrices as row-major nested arrays; floats
// print with 17 significant digits so identical runs are byte-identical.
#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "agler/family.hpp"

namespace agler {

struct InstanceDocument {
  PointSet points;
  std::map<std::string, std::vector<std::string>> subsets;
  std::map<std::string, std::map<std::string, Complex>> functions;

  KernelFamily family;
  std::vector<Kernel> kernels;  // explicit kernels from the document

  std::optional<double> rho;
  std::optional<std::string> z_label;

  struct EvalSpec {
    std::string z;
    std::string w;
    double theta = 0.0;
  };
  std::optional<EvalSpec> eval;

  struct CompressionRequest {
    std::string z;
    Vector gamma;
    double theta = 0.0;
  };
  std::optional<CompressionRequest> compression;

  std::uint64_t seed = 0;
  int samples = 25;

  double tol_psd = tol::psd_rel;
  double tol_rank = tol::rank_rel;
  double tol_quotient = 1e-6;
  double tol_rho = 1e-9;
};

// Throws Error(invalid_input, "schema: ...") on malformed documents.
InstanceDocument parse_instance(const nlohmann::json& doc);
InstanceDocument load_instance(const std::string& path);

nlohmann::json complex_json(Complex z);
Complex parse_complex(const nlohmann::json& v);
nlohmann::json matrix_json(const Matrix& m);
nlohmann::json real_vector_json(const std::vector<double>& v);
nlohmann::json function_json(const ScalarFunction& f);

// Deterministic writer: floats via "%.17g", keys in sorted order.
void write_json(std::ostream& os, const nlohmann::json& value);

}  // namespace agler
