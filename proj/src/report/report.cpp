#include "qbc/report/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>

namespace qbc {

std::string format_number(double x, int precision) {
  if (std::abs(x) < std::pow(10.0, -precision - 3)) x = 0.0;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", precision, x);
  return buf;
}

std::string format_complex(cplx z, int precision) {
  const double eps = std::pow(10.0, -precision);
  const bool re = std::abs(z.real()) >= eps, im = std::abs(z.imag()) >= eps;
  if (!im) return format_number(re ? z.real() : 0.0, precision);
  if (!re) return format_number(z.imag(), precision) + "i";
  std::string s = format_number(z.real(), precision);
  s += z.imag() < 0 ? " - " : " + ";
  return "(" + s + format_number(std::abs(z.imag()), precision) + "i)";
}

namespace {

// Margin as emitted in JSON: rounded to the report precision, with
// round-off noise below 1e-12 shown as 0.
double stable(double x, int precision) {
  if (std::abs(x) < 1e-12) return 0.0;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", precision, x);
  return std::strtod(buf, nullptr);
}

std::vector<std::string> labels_for(const VariableRegistry& reg, std::size_t d) {
  if (reg.dim() == d && reg.size() > 0) return basis_labels(reg.dims());
  std::vector<std::string> out;
  for (std::size_t i = 0; i < d; ++i) out.push_back(std::to_string(i));
  return out;
}

// Fixes the global phase so that the largest entry is real and positive.
Vector canonical_phase(const Vector& v) {
  Eigen::Index k = 0;
  v.cwiseAbs().maxCoeff(&k);
  if (std::abs(v(k)) == 0) return v;
  return v * (std::conj(v(k)) / std::abs(v(k)));
}

}  // namespace

std::string format_vector(const Vector& v, const VariableRegistry& reg, const ReportOptions& o) {
  const auto labels = labels_for(reg, static_cast<std::size_t>(v.size()));
  const double eps = std::pow(10.0, -o.precision);
  std::string s;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::abs(v(i)) < eps) continue;
    std::string c = format_complex(v(i), o.precision);
    if (!s.empty()) {
      if (c[0] == '-') {
        s += " - ";
        c = c.substr(1);
      } else {
        s += " + ";
      }
    }
    s += (c == "1" ? "" : c == "-1" ? "-" : c) + "|" + labels[i] + ">";
  }
  return s.empty() ? "0" : s;
}

std::string format_matrix(const Matrix& m, const VariableRegistry& reg, const ReportOptions& o) {
  const double eps = std::pow(10.0, -o.precision);
  if (m.rows() == m.cols() && hermitian_defect(m) < eps) {
    Tolerances t;
    t.hermitian_eps = 1.0;
    Eig e = herm_eig(m, t);
    std::vector<Eigen::Index> nz;
    for (Eigen::Index i = 0; i < e.values.size(); ++i)
      if (std::abs(e.values(i)) >= eps) nz.push_back(i);
    if (nz.empty()) return "0";
    if (static_cast<int>(nz.size()) <= o.dirac_rank) {
      std::string s;
      for (auto i : nz) {
        const double l = e.values(i);
        std::string c = format_number(std::abs(l), o.precision);
        s += s.empty() ? (l < 0 ? "-" : "") : (l < 0 ? " - " : " + ");
        s += (c == "1" ? "" : c + " ") + "[" + format_vector(canonical_phase(e.vectors.col(i)), reg, o) + "]";
      }
      return s;
    }
  }
  std::string s = "[";
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    s += r ? ",\n [" : "[";
    for (Eigen::Index c = 0; c < m.cols(); ++c) s += (c ? ", " : "") + format_complex(m(r, c), o.precision);
    s += "]";
  }
  return s + "]";
}

Json matrix_json(const Matrix& m) {
  Json rows = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back({m(r, c).real(), m(r, c).imag()});
    rows.push_back(row);
  }
  return rows;
}

Json vector_json(const Vector& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back({v(i).real(), v(i).imag()});
  return out;
}

Matrix matrix_from_json(const Json& j) {
  if (!j.is_array() || j.empty()) throw ShapeError("matrix must be a nonempty array of rows");
  const std::size_t rows = j.size(), cols = j[0].size();
  Matrix m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    if (!j[r].is_array() || j[r].size() != cols) throw ShapeError("ragged matrix");
    for (std::size_t c = 0; c < cols; ++c) {
      const Json& e = j[r][c];
      if (e.is_number()) m(r, c) = e.get<double>();
      else if (e.is_array() && e.size() == 2) m(r, c) = cplx(e[0].get<double>(), e[1].get<double>());
      else throw ShapeError("matrix entries must be [re, im] pairs");
    }
  }
  return m;
}

Json binding_json(const Binding& b) {
  Json o = Json::object();
  for (const auto& [k, v] : b) o[k] = v;
  return o;
}

Json obligation_json(const Obligation& o, const VariableRegistry& reg, const ReportOptions& opt) {
  Json j;
  j["kind"] = ob_kind_name(o.kind);
  j["verdict"] = verdict_name(o.verdict);
  j["description"] = o.description;
  if (!o.lhs.empty()) j["lhs"] = o.lhs;
  if (!o.rhs.empty()) j["rhs"] = o.rhs;
  j["bindings"] = o.bindings;
  if (std::isfinite(o.margin)) j["margin"] = stable(o.margin, opt.precision);
  j["bounded"] = o.bounded;
  if (o.binding) j["binding"] = binding_json(*o.binding);
  if (o.witness.size() > 0) {
    j["witness"] = vector_json(o.witness);
    j["witness_text"] = format_vector(canonical_phase(o.witness), reg, opt);
  }
  if (!o.detail.empty()) j["detail"] = o.detail;
  return j;
}

Json step_json(const StepRecord& s, std::size_t index, const VariableRegistry& reg, const ReportOptions& opt) {
  Json j;
  j["step"] = index;
  j["rule"] = s.app.rule;
  j["hole"] = s.app.hole;
  Json args = Json::object();
  for (const auto& a : s.app.args) args[a.key] = a.raw;
  j["args"] = args;
  j["accepted"] = s.accepted;
  j["new_holes"] = s.new_holes;
  Json obs = Json::array();
  for (const auto& o : s.obligations) obs.push_back(obligation_json(o, reg, opt));
  j["obligations"] = obs;
  return j;
}

Json check_json(const CheckResult& r, const VariableRegistry& reg, const ReportOptions& opt) {
  Json j;
  j["verdict"] = verdict_name(r.verdict);
  if (std::isfinite(r.margin)) j["margin"] = stable(r.margin, opt.precision);
  j["bindings"] = r.bindings;
  if (r.cex) {
    Json c;
    c["binding"] = binding_json(r.cex->binding);
    c["witness"] = vector_json(r.cex->witness);
    c["witness_text"] = format_vector(canonical_phase(r.cex->witness), reg, opt);
    c["min_eig"] = r.cex->min_eig;
    j["counterexample"] = c;
  }
  j["converged"] = r.diag.converged;
  if (!r.diag.messages.empty()) j["diagnostics"] = r.diag.messages;
  return j;
}

Json replay_json(const ReplayReport& r, const VariableRegistry& reg, const ReportOptions& opt) {
  Json j;
  j["status"] = replay_status_name(r.status);
  if (!r.error.empty()) j["error"] = r.error;
  if (r.failed_step) j["failed_step"] = *r.failed_step;
  Json steps = Json::array();
  for (std::size_t i = 0; i < r.steps.size(); ++i) {
    Json s = step_json(r.steps[i], i + 1, reg, opt);
    if (i + 1 == r.steps.size()) s["final_program"] = r.final_program;
    steps.push_back(s);
  }
  j["steps"] = steps;
  j["final_program"] = r.final_program;
  if (r.verification) j["verification"] = check_json(*r.verification, reg, opt);
  return j;
}

std::string obligation_text(const Obligation& o, const VariableRegistry& reg, const ReportOptions& opt) {
  std::string s = "  [" + std::string(verdict_name(o.verdict)) + "] " + ob_kind_name(o.kind) + ": " + o.description;
  if (o.bounded) s += " (bounded certificate)";
  s += "\n";
  if (!o.lhs.empty()) s += "      " + o.lhs + "\n   => " + o.rhs + "\n";
  if (o.verdict != Verdict::Holds) {
    if (o.binding && !o.binding->empty()) s += "    at " + binding_str(*o.binding) + "\n";
    if (o.witness.size() > 0)
      s += "    witness " + format_vector(canonical_phase(o.witness), reg, opt) + ", margin " +
           format_number(o.margin, opt.precision) + "\n";
    if (!o.detail.empty()) s += "    " + o.detail + "\n";
  }
  return s;
}

std::string step_text(const StepRecord& s, std::size_t index, const VariableRegistry& reg, const ReportOptions& opt) {
  RuleApplication a = s.app;
  a.ids = s.new_holes;
  std::string out = std::to_string(index) + ". " + print_application(a) + (s.accepted ? "" : "  [rejected]") + "\n";
  for (const auto& o : s.obligations) out += obligation_text(o, reg, opt);
  return out;
}

std::string check_text(const CheckResult& r, const VariableRegistry& reg, const ReportOptions& opt) {
  std::string s = std::string("verdict: ") + verdict_name(r.verdict);
  if (std::isfinite(r.margin)) s += " (margin " + format_number(r.margin, opt.precision) + ")";
  s += "\n";
  if (r.cex) {
    if (!r.cex->binding.empty()) s += "  at " + binding_str(r.cex->binding) + "\n";
    s += "  witness " + format_vector(canonical_phase(r.cex->witness), reg, opt) + "\n";
  }
  for (const auto& m : r.diag.messages) s += "  diagnostic: " + m + "\n";
  return s;
}

std::string replay_text(const ReplayReport& r, const VariableRegistry& reg, const ReportOptions& opt) {
  std::string s;
  for (std::size_t i = 0; i < r.steps.size(); ++i) s += step_text(r.steps[i], i + 1, reg, opt);
  s += "program: " + r.final_program + "\n";
  if (r.verification) s += "constructed program " + check_text(*r.verification, reg, opt);
  s += std::string("status: ") + replay_status_name(r.status) + "\n";
  if (!r.error.empty()) s += "error: " + r.error + "\n";
  return s;
}

}  // namespace qbc
