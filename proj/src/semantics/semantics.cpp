#include "qbc/semantics/semantics.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <algorithm>
#include <cmath>

#include "qbc/linalg/kernels.hpp"

namespace qbc {

void Diagnostics::fail(std::string msg) {
  converged = false;
  messages.push_back(std::move(msg));
}

void Diagnostics::merge(const Diagnostics& o) {
  converged = converged && o.converged;
  max_iterations = std::max(max_iterations, o.max_iterations);
  messages.insert(messages.end(), o.messages.begin(), o.messages.end());
}

Matrix Superoperator::apply(const Matrix& rho) const {
  if (static_cast<std::size_t>(rho.rows()) != dim || rho.rows() != rho.cols())
    throw ShapeError("state does not match superoperator dimension");
  return unvec(transfer * vec(rho), dim);
}

Matrix adjoint_apply(const Superoperator& s, const Matrix& q) {
  if (static_cast<std::size_t>(q.rows()) != s.dim || q.rows() != q.cols())
    throw ShapeError("predicate does not match superoperator dimension");
  return unvec(s.transfer.adjoint() * vec(q), s.dim);
}

std::optional<std::string> state_violation(const Matrix& rho, const Tolerances& tol) {
  if (rho.rows() != rho.cols()) return "state is not square";
  if (!all_finite(rho)) return "state has non-finite entries";
  if (hermitian_defect(rho) > tol.hermitian_eps) return "state is not Hermitian";
  Eig e = herm_eig(rho, tol);
  if (e.values.size() > 0 && e.values(0) < -tol.psd_eps)
    return "state is not positive semidefinite (min eigenvalue " + std::to_string(e.values(0)) + ")";
  const double t = trace_real(rho);
  if (t > 1.0 + tol.trace_eps) return "state has trace " + std::to_string(t) + " > 1";
  return std::nullopt;
}

Semantics::Semantics(VariableRegistry reg, std::shared_ptr<const Env> env, Tolerances tol)
    : reg_(std::move(reg)), tol_(tol), eval_(reg_, std::move(env), tol, this) {}

// ------------------------------------------------------------------ lowering

namespace {

std::shared_ptr<const SubsystemLayout> layout_for(const VariableRegistry& reg, const std::vector<std::string>& vars) {
  auto idx = reg.indices_of(vars);
  return std::make_shared<SubsystemLayout>(reg, idx);
}

std::string short_src(const ProgPtr& p) {
  std::string s = print_program(p);
  if (s.size() > 60) s = s.substr(0, 57) + "...";
  return s;
}

}  // namespace

LNodePtr Semantics::lower(const ProgPtr& p, const Binding& b) const {
  const auto key = std::make_pair(p.get(), binding_str(b));
  {
    std::lock_guard lk(mu_);
    if (auto it = cache_.find(key); it != cache_.end()) return it->second.second;
  }
  LNodePtr n = lower_rec(p, b);
  std::lock_guard lk(mu_);
  if (cache_.size() > 4096) cache_.clear();
  cache_[key] = {p, n};
  return n;
}

LNodePtr Semantics::lower_rec(const ProgPtr& p, const Binding& b) const {
  auto n = std::make_shared<LNode>();
  n->kind = p->kind;
  n->where = short_src(p);
  auto guard_kraus = [&](const ExprPtr& g) {
    Matrix bm = symmetrize(eval_.local_operator(g ? g : default_guard(), p->vars, b), tol_);
    if (auto v = predicate_violation(bm, tol_))
      throw SemanticsError("guard of '" + n->where + "' is not a measurement: " + *v);
    const Matrix id = identity(bm.rows());
    n->kraus = {psd_sqrt(id - bm, tol_), psd_sqrt(bm, tol_)};
  };
  switch (p->kind) {
    case ProgKind::Skip: break;
    case ProgKind::Init: n->layout = layout_for(reg_, p->vars); break;
    case ProgKind::Unitary: {
      n->layout = layout_for(reg_, p->vars);
      n->op = eval_.local_operator(p->op, p->vars, b);
      if (!is_unitary(n->op, tol_.unitary_eps))
        throw SemanticsError("operator in '" + n->where + "' is not unitary");
      break;
    }
    case ProgKind::Seq:
      for (const auto& c : p->body) n->body.push_back(lower_rec(c, b));
      break;
    case ProgKind::Repeat:
      if (p->count < 0) throw SemanticsError("negative repeat count");
      n->count = p->count;
      n->body.push_back(lower_rec(p->body[0], b));
      break;
    case ProgKind::Case: {
      n->layout = layout_for(reg_, p->vars);
      auto meas = case_measurement(*p, reg_);
      if (meas.size() != p->labels.size())
        throw SemanticsError("case '" + n->where + "' has " + std::to_string(p->labels.size()) +
                             " branches but the measurement has " + std::to_string(meas.size()) + " outcomes");
      const std::size_t ld = n->layout->local_dim();
      Matrix sum = Matrix::Zero(ld, ld);
      for (std::size_t i = 0; i < p->labels.size(); ++i) {
        auto it = std::find_if(meas.begin(), meas.end(), [&](const auto& m) { return m.first == p->labels[i]; });
        if (it == meas.end()) throw SemanticsError("case branch '" + p->labels[i] + "' is not a measurement outcome");
        Matrix m = symmetrize(eval_.local_operator(it->second, p->vars, b), tol_);
        Eig e = herm_eig(m, tol_);
        if (e.values(0) < -tol_.psd_eps)
          throw SemanticsError("measurement operator '" + p->labels[i] + "' is not positive semidefinite");
        sum += m;
        n->kraus.push_back(psd_sqrt(m, tol_));
        n->labels.push_back(p->labels[i]);
        n->body.push_back(lower_rec(p->body[i], b));
      }
      if ((sum - identity(ld)).cwiseAbs().maxCoeff() > tol_.povm_eps)
        throw SemanticsError("measurement operators of '" + n->where + "' do not sum to I");
      break;
    }
    case ProgKind::If: {
      n->kind = ProgKind::Case;
      n->layout = layout_for(reg_, p->vars);
      guard_kraus(p->op);
      std::swap(n->kraus[0], n->kraus[1]);
      n->labels = {"1", "0"};
      n->body.push_back(lower_rec(p->body[0], b));
      n->body.push_back(lower_rec(p->body.size() > 1 && p->body[1] ? p->body[1] : pg::skip(), b));
      break;
    }
    case ProgKind::While:
      n->layout = layout_for(reg_, p->vars);
      guard_kraus(p->op);
      n->body.push_back(lower_rec(p->body[0], b));
      break;
    case ProgKind::Hole: throw SemanticsError("program contains hole '" + p->hole_id + "'");
  }
  return n;
}

// ------------------------------------------------------------ forward action

Matrix Semantics::kraus_map(const Matrix& k, const SubsystemLayout& lay, const Matrix& rho) const {
  return kernels::conjugate(k, lay, rho);
}

Matrix Semantics::kraus_adj(const Matrix& k, const SubsystemLayout& lay, const Matrix& x) const {
  return kernels::conjugate(k.adjoint(), lay, x);
}

Matrix Semantics::apply(const ProgPtr& p, const Matrix& rho, const Binding& b, Diagnostics* d) const {
  if (static_cast<std::size_t>(rho.rows()) != reg_.dim() || rho.rows() != rho.cols())
    throw ShapeError("state of dimension " + std::to_string(rho.rows()) + " does not match register dimension " +
                     std::to_string(reg_.dim()));
  return apply(*lower(p, b), rho, d);
}

Matrix Semantics::apply(const LNode& n, const Matrix& rho, Diagnostics* d) const {
  switch (n.kind) {
    case ProgKind::Skip: return rho;
    case ProgKind::Init: return kernels::reset(rho, *n.layout);
    case ProgKind::Unitary: return kernels::conjugate(n.op, *n.layout, rho);
    case ProgKind::Seq: {
      Matrix s = rho;
      for (const auto& c : n.body) s = apply(*c, s, d);
      return s;
    }
    case ProgKind::Repeat: {
      Matrix s = rho;
      for (int i = 0; i < n.count; ++i) s = apply(*n.body[0], s, d);
      return s;
    }
    case ProgKind::Case: {
      Matrix out = Matrix::Zero(rho.rows(), rho.cols());
      for (std::size_t i = 0; i < n.kraus.size(); ++i)
        out += apply(*n.body[i], kraus_map(n.kraus[i], *n.layout, rho), d);
      return out;
    }
    case ProgKind::While: {
      Matrix out = Matrix::Zero(rho.rows(), rho.cols());
      Matrix s = rho;
      for (int k = 0;; ++k) {
        Matrix exit = kraus_map(n.kraus[0], *n.layout, s);
        out += exit;
        Matrix in = kraus_map(n.kraus[1], *n.layout, s);
        const double mass = std::abs(in.trace());
        if (mass < tol_.loop_tail_eps) {
          if (d) d->max_iterations = std::max(d->max_iterations, k + 1);
          break;
        }
        Matrix next = apply(*n.body[0], in, d);
        if (frobenius(next - s) <= tol_.loop_tail_eps && std::abs(exit.trace()) <= tol_.loop_tail_eps) {
          if (d) d->max_iterations = std::max(d->max_iterations, k + 1);
          break;
        }
        if (k + 1 >= tol_.loop_cap) {
          if (d) {
            d->max_iterations = std::max(d->max_iterations, k + 1);
            d->fail("loop not numerically converged: '" + n.where + "' after " + std::to_string(k + 1) +
                    " iterations, in-loop trace " + std::to_string(mass));
          }
          break;
        }
        s = std::move(next);
      }
      return out;
    }
    case ProgKind::If:
    case ProgKind::Hole: break;
  }
  throw SemanticsError("unexpected node in lowered program");
}

// ------------------------------------------------------------ adjoint action

Matrix Semantics::adjoint(const ProgPtr& p, const Matrix& x, const Binding& b, Diagnostics* d) const {
  if (static_cast<std::size_t>(x.rows()) != reg_.dim() || x.rows() != x.cols())
    throw ShapeError("operator of dimension " + std::to_string(x.rows()) + " does not match register dimension " +
                     std::to_string(reg_.dim()));
  return adjoint(*lower(p, b), x, d);
}

Matrix Semantics::adjoint(const LNode& n, const Matrix& x, Diagnostics* d) const {
  switch (n.kind) {
    case ProgKind::Skip: return x;
    case ProgKind::Init: return kernels::reset_adjoint(x, *n.layout);
    case ProgKind::Unitary: return kernels::conjugate(n.op.adjoint(), *n.layout, x);
    case ProgKind::Seq: {
      Matrix s = x;
      for (auto it = n.body.rbegin(); it != n.body.rend(); ++it) s = adjoint(**it, s, d);
      return s;
    }
    case ProgKind::Repeat: {
      Matrix s = x;
      for (int i = 0; i < n.count; ++i) s = adjoint(*n.body[0], s, d);
      return s;
    }
    case ProgKind::Case: {
      Matrix out = Matrix::Zero(x.rows(), x.cols());
      for (std::size_t i = 0; i < n.kraus.size(); ++i)
        out += kraus_adj(n.kraus[i], *n.layout, adjoint(*n.body[i], x, d));
      return out;
    }
    case ProgKind::While: {
      // sum_k (B1^dagger C^dagger)^k B0^dagger(x); y_k = (B1^dagger C^dagger)^k(I) bounds the tail.
      Matrix term = kraus_adj(n.kraus[0], *n.layout, x);
      Matrix out = term;
      Matrix y = identity(x.rows());
      for (int k = 1;; ++k) {
        term = kraus_adj(n.kraus[1], *n.layout, adjoint(*n.body[0], term, d));
        Matrix y2 = kraus_adj(n.kraus[1], *n.layout, adjoint(*n.body[0], y, d));
        out += term;
        const double tail = frobenius(y2);
        if (tail <= tol_.loop_tail_eps ||
            (frobenius(term) <= tol_.loop_tail_eps && frobenius(y2 - y) <= tol_.loop_tail_eps)) {
          if (d) d->max_iterations = std::max(d->max_iterations, k);
          break;
        }
        if (k >= tol_.loop_cap) {
          if (d) {
            d->max_iterations = std::max(d->max_iterations, k);
            d->fail("loop not numerically converged: '" + n.where + "' after " + std::to_string(k) +
                    " iterations, tail bound " + std::to_string(tail));
          }
          break;
        }
        y = std::move(y2);
      }
      return out;
    }
    case ProgKind::If:
    case ProgKind::Hole: break;
  }
  throw SemanticsError("unexpected node in lowered program");
}

double Semantics::termination_probability(const ProgPtr& p, const Matrix& rho, const Binding& b,
                                          Diagnostics* d) const {
  return trace_real(apply(p, rho, b, d));
}

// ------------------------------------------------------------ transfer matrices

namespace {

Matrix kraus_transfer(const Matrix& k, const SubsystemLayout& lay) {
  Matrix ke = kernels::embed(k, lay);
  return kron(ke.conjugate(), ke, std::size_t{1} << 30);
}

template <class F>
Matrix transfer_by_columns(std::size_t d, F&& f) {
  Matrix t(d * d, d * d);
  for (std::size_t j = 0; j < d; ++j)
    for (std::size_t i = 0; i < d; ++i) {
      Matrix e = Matrix::Zero(d, d);
      e(i, j) = 1.0;
      t.col(static_cast<Eigen::Index>(i + j * d)) = vec(f(e));
    }
  return t;
}

}  // namespace

Matrix Semantics::transfer(const LNode& n, Diagnostics* d) const {
  const std::size_t dim = reg_.dim();
  const auto dd = static_cast<Eigen::Index>(dim * dim);
  switch (n.kind) {
    case ProgKind::Skip: return Matrix::Identity(dd, dd);
    case ProgKind::Init:
      return transfer_by_columns(dim, [&](const Matrix& e) { return kernels::reset(e, *n.layout); });
    case ProgKind::Unitary: return kraus_transfer(n.op, *n.layout);
    case ProgKind::Seq: {
      Matrix t = Matrix::Identity(dd, dd);
      for (const auto& c : n.body) t = (transfer(*c, d) * t).eval();
      return t;
    }
    case ProgKind::Repeat: {
      Matrix b = transfer(*n.body[0], d);
      Matrix t = Matrix::Identity(dd, dd);
      for (int i = 0; i < n.count; ++i) t = (b * t).eval();
      return t;
    }
    case ProgKind::Case: {
      Matrix t = Matrix::Zero(dd, dd);
      for (std::size_t i = 0; i < n.kraus.size(); ++i)
        t += transfer(*n.body[i], d) * kraus_transfer(n.kraus[i], *n.layout);
      return t;
    }
    case ProgKind::While: {
      const Matrix t0 = kraus_transfer(n.kraus[0], *n.layout);
      const Matrix m = transfer(*n.body[0], d) * kraus_transfer(n.kraus[1], *n.layout);
      Eigen::ComplexEigenSolver<Matrix> es(m, false);
      const double radius = es.eigenvalues().cwiseAbs().maxCoeff();
      if (radius < 1.0 - 1e-6) {
        Matrix lhs = Matrix::Identity(dd, dd) - m;
        // T = T0 (I - M)^{-1}  <=>  (I - M)^T T^T = T0^T
        Matrix tt = lhs.transpose().partialPivLu().solve(t0.transpose());
        return tt.transpose();
      }
      // Truncated sum; the trace functional of M^k plays the role of the in-loop mass.
      const Vector tr_row = vec(identity(dim));
      Matrix acc = Matrix::Zero(dd, dd);
      Matrix pk = Matrix::Identity(dd, dd);
      for (int k = 1;; ++k) {
        Matrix term = t0 * pk;
        acc += term;
        Matrix next = m * pk;
        const double tail = (tr_row.adjoint() * next).norm();
        if (tail <= tol_.loop_tail_eps ||
            ((t0 * next).norm() <= tol_.loop_tail_eps && (next - pk).norm() <= tol_.loop_tail_eps)) {
          if (d) d->max_iterations = std::max(d->max_iterations, k);
          break;
        }
        if (k >= tol_.loop_cap) {
          if (d) {
            d->max_iterations = std::max(d->max_iterations, k);
            d->fail("loop not numerically converged: '" + n.where + "' (spectral radius " +
                    std::to_string(radius) + ") after " + std::to_string(k) + " iterations");
          }
          break;
        }
        pk = std::move(next);
      }
      return acc;
    }
    case ProgKind::If:
    case ProgKind::Hole: break;
  }
  throw SemanticsError("unexpected node in lowered program");
}

Superoperator Semantics::superoperator(const ProgPtr& p, const Binding& b, bool check_cp) const {
  const std::size_t dim = reg_.dim();
  if (dim > tol_.superop_dim_cap)
    throw CapacityError("register dimension " + std::to_string(dim) + " exceeds the superoperator cap " +
                        std::to_string(tol_.superop_dim_cap));
  Superoperator s;
  s.dim = dim;
  s.transfer = transfer(*lower(p, b), &s.diag);
  const Vector tr_row = vec(identity(dim));
  const Matrix lhs = tr_row.adjoint() * s.transfer;
  s.is_trace_preserving = (lhs - tr_row.adjoint()).cwiseAbs().maxCoeff() <= tol_.trace_eps;
  if (check_cp) {
    // Choi matrix sum_ij |i><j| (x) Phi(|i><j|), input factor first.
    const auto d2 = static_cast<Eigen::Index>(dim * dim);
    Matrix choi = Matrix::Zero(d2, d2);
    for (std::size_t j = 0; j < dim; ++j)
      for (std::size_t i = 0; i < dim; ++i) {
        Matrix out = unvec(s.transfer.col(static_cast<Eigen::Index>(i + j * dim)), dim);
        choi.block(static_cast<Eigen::Index>(i * dim), static_cast<Eigen::Index>(j * dim),
                   static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim)) = out;
      }
    Eig e = herm_eig(choi, tol_);
    s.is_cp_verified = e.values(0) >= -tol_.psd_eps;
  }
  return s;
}

// ------------------------------------------------------------ transformers

Matrix Semantics::wp(const ProgPtr& p, const Matrix& x, const Binding& b) const {
  Diagnostics d;
  Matrix r = adjoint(p, x, b, &d);
  if (!d.converged) throw ConvergenceError(d.messages.front());
  return r;
}

Matrix Semantics::wp_truncated(const ProgPtr& w, int k, const Matrix& x, const Binding& b) const {
  if (w->kind != ProgKind::While) throw SemanticsError("truncation needs a while loop");
  if (static_cast<std::size_t>(x.rows()) != reg_.dim() || x.rows() != x.cols())
    throw ShapeError("operator does not match register dimension");
  if (k < 0) return Matrix::Zero(x.rows(), x.cols());
  LNodePtr n = lower(w, b);
  Diagnostics d;
  Matrix term = kraus_adj(n->kraus[0], *n->layout, x);
  Matrix out = term;
  for (int j = 1; j <= k; ++j) {
    term = kraus_adj(n->kraus[1], *n->layout, adjoint(*n->body[0], term, &d));
    out += term;
    if (frobenius(term) < 1e-30) break;
  }
  if (!d.converged) throw ConvergenceError(d.messages.front());
  return out;
}

}  // namespace qbc
