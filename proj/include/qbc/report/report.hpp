#pragma once

#include <string>

#include <json.hpp>

#include "qbc/refine/derive.hpp"

namespace qbc {

using Json = nlohmann::ordered_json;

struct ReportOptions {
  int precision = 6;  // significant digits
  int dirac_rank = 4; // Dirac-sum form up to this rank
};

std::string format_number(double x, int precision = 6);
std::string format_complex(cplx z, int precision = 6);
/// Vector as a sum of basis kets, e.g. 0.707107|00> + 0.707107|11>.
std::string format_vector(const Vector& v, const VariableRegistry& reg, const ReportOptions& o = {});
/// Hermitian matrices of small rank as sum of l |v><v|; otherwise row by row.
std::string format_matrix(const Matrix& m, const VariableRegistry& reg, const ReportOptions& o = {});

/// Nested arrays of [re, im] pairs.
Json matrix_json(const Matrix& m);
Json vector_json(const Vector& v);
Matrix matrix_from_json(const Json& j);
Json binding_json(const Binding& b);

Json obligation_json(const Obligation& o, const VariableRegistry& reg, const ReportOptions& opt = {});
Json step_json(const StepRecord& s, std::size_t index, const VariableRegistry& reg, const ReportOptions& opt = {});
Json check_json(const CheckResult& r, const VariableRegistry& reg, const ReportOptions& opt = {});
Json replay_json(const ReplayReport& r, const VariableRegistry& reg, const ReportOptions& opt = {});

std::string obligation_text(const Obligation& o, const VariableRegistry& reg, const ReportOptions& opt = {});
std::string step_text(const StepRecord& s, std::size_t index, const VariableRegistry& reg,
                      const ReportOptions& opt = {});
std::string check_text(const CheckResult& r, const VariableRegistry& reg, const ReportOptions& opt = {});
std::string replay_text(const ReplayReport& r, const VariableRegistry& reg, const ReportOptions& opt = {});

}  // namespace qbc
