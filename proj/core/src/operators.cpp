#include "lgp/operators.hpp"

namespace lgp {

Vector lagrangian_apply_kinetic(const CholeskyKernelSpec& spec_T, const DifferentialInput& at,
                                const Vector& q_test, const Vector& qdot_test) {
  const Index n = spec_T.dim();
  if (spec_T.is_zero()) return Vector::Zero(n);
  const Matrix& A = spec_T.gram();
  const Matrix& lam = spec_T.metric();
  const Vector d = at.q - q_test;
  const double e = spec_T.weight(d);
  const Vector& v = at.qdot;
  const Vector& a = at.qddot;
  const Vector& w = qdot_test;

  const double drift = d.dot(lam * v);
  const Vector wv = w.cwiseProduct(v);
  const Vector s = A * wv;
  const double energy = wv.dot(s);
  return 0.5 * e *
         (w.cwiseProduct(A * w.cwiseProduct(a)) - 2.0 * drift * w.cwiseProduct(s) +
          energy * (lam * d));
}

Vector lagrangian_apply_potential(const MetricKernel& kernel, const Vector& q_i,
                                  const Vector& q_test) {
  return kernel.gradient(q_i - q_test);
}

Vector lagrangian_apply_potential(const CholeskyKernelSpec& spec_U, const Vector& q_i,
                                  const Vector& q_test) {
  const Index n = spec_U.dim();
  if (spec_U.is_zero()) return Vector::Zero(n);
  const Matrix& A = spec_U.gram();
  const Vector d = q_i - q_test;
  const double e = spec_U.weight(d);
  const Vector z = q_i.cwiseProduct(q_test);
  const Vector az = A * z;
  const double quad = z.dot(az);
  return 0.5 * e * (q_test.cwiseProduct(az) - quad * (spec_U.metric() * d));
}

Vector elastic_grad_second(const CholeskyKernelSpec& spec_U, const Vector& p, const Vector& u) {
  const Index n = spec_U.dim();
  if (spec_U.is_zero()) return Vector::Zero(n);
  const Matrix& A = spec_U.gram();
  const Vector d = p - u;
  const double e = spec_U.weight(d);
  const Vector z = p.cwiseProduct(u);
  const Vector az = A * z;
  return 0.5 * e * (p.cwiseProduct(az) + z.dot(az) * (spec_U.metric() * d));
}

Matrix elastic_cross_hessian(const CholeskyKernelSpec& spec_U, const Vector& p, const Vector& u) {
  const Index n = spec_U.dim();
  if (spec_U.is_zero()) return Matrix::Zero(n, n);
  const Matrix& A = spec_U.gram();
  const Matrix& lam = spec_U.metric();
  const Vector d = p - u;
  const double e = spec_U.weight(d);
  const Vector z = p.cwiseProduct(u);
  const Vector az = A * z;
  const double quad = z.dot(az);
  const Vector ld = lam * d;
  Matrix out = quad * (lam - 2.0 * ld * ld.transpose());
  out.noalias() -= 2.0 * ld * p.cwiseProduct(az).transpose();
  out.noalias() += 2.0 * u.cwiseProduct(az) * ld.transpose();
  out.diagonal() += az;
  out += u.asDiagonal() * A * p.asDiagonal();
  return 0.5 * e * out;
}

double potential_value(const LagrangianKernel& kernel, const Vector& p, const Vector& u) {
  double value = kernel.gravity.eval(p - u);
  if (!kernel.elastic.is_zero()) value += kernel.elastic.kappa(p, p, u, u);
  return value;
}

Vector potential_grad_first(const LagrangianKernel& kernel, const Vector& p, const Vector& u) {
  return kernel.gravity.gradient(p - u) + lagrangian_apply_potential(kernel.elastic, p, u);
}

Vector potential_grad_second(const LagrangianKernel& kernel, const Vector& p, const Vector& u) {
  return -kernel.gravity.gradient(p - u) + elastic_grad_second(kernel.elastic, p, u);
}

Matrix potential_cross_hessian(const LagrangianKernel& kernel, const Vector& p, const Vector& u) {
  return kernel.gravity.cross_hessian(p - u) + elastic_cross_hessian(kernel.elastic, p, u);
}

// The kinetic block is L_i applied to the vector G = L_j kappa_1, where
//   G = 1/2 e [v o A(v o b) + 2 theta v o A(v o w) - P Lambda d],
// with d = q_i - q_j, e = exp(-d^T Lambda d), theta = d^T Lambda w and
// P = (v o w)^T A (v o w). Each term below is one piece of
//   L_i(e h) = e [h_vv a - 2 (d^T Lambda v) h_v + (h_vd) v + 2 (Lambda d) h - h_d].
Matrix kinetic_torque_block(const CholeskyKernelSpec& spec_T, const DifferentialInput& at_i,
                            const DifferentialInput& at_j) {
  const Index n = spec_T.dim();
  if (spec_T.is_zero()) return Matrix::Zero(n, n);
  const Matrix& A = spec_T.gram();
  const Matrix& lam = spec_T.metric();
  const Vector d = at_i.q - at_j.q;
  const double e = spec_T.weight(d);
  const Vector& v = at_i.qdot;
  const Vector& a = at_i.qddot;
  const Vector& w = at_j.qdot;
  const Vector& b = at_j.qddot;

  const Vector vw = v.cwiseProduct(w);
  const Vector s = A * vw;
  const Vector r = A * v.cwiseProduct(b);
  const Vector ab = A * b.cwiseProduct(a);
  const Vector aw = A * w.cwiseProduct(a);
  const double P = vw.dot(s);
  const Vector eta = lam * d;
  const Vector lw = lam * w;
  const Vector lv = lam * v;
  const double theta = d.dot(lw);
  const double drift = d.dot(lv);
  const double omega = v.dot(lw);

  Matrix K(n, n);
  for (Index al = 0; al < n; ++al) {
    for (Index be = 0; be < n; ++be) {
      const double delta = (al == be) ? 1.0 : 0.0;
      const double t1 = delta * ab(be) + A(be, al) * b(al) * a(be) +
                        2.0 * theta * (delta * aw(be) + A(be, al) * w(al) * a(be)) -
                        2.0 * eta(be) * w(al) * aw(al);
      const double t2 = -2.0 * drift *
                        (delta * r(be) + v(be) * A(be, al) * b(al) +
                         2.0 * theta * (delta * s(be) + v(be) * A(be, al) * w(al)) -
                         2.0 * eta(be) * w(al) * s(al));
      const double t3 = 2.0 * omega * (delta * s(be) + v(be) * A(be, al) * w(al)) -
                        2.0 * w(al) * s(al) * lv(be);
      const double t4 =
          2.0 * eta(al) * (v(be) * r(be) + 2.0 * theta * v(be) * s(be) - P * eta(be));
      const double t5 = -2.0 * lw(al) * v(be) * s(be) + P * lam(be, al);
      K(al, be) = 0.5 * e * (t1 + t2 + t3 + t4 + t5);
    }
  }
  return K;
}

Matrix torque_kernel_block(const LagrangianKernel& kernel, const DifferentialInput& at_i,
                           const DifferentialInput& at_j) {
  return kinetic_torque_block(kernel.kinetic, at_i, at_j) +
         potential_cross_hessian(kernel, at_i.q, at_j.q);
}

Matrix torque_equilibrium_block(const LagrangianKernel& kernel, const Vector& q) {
  const Index n = kernel.dim();
  const Vector origin = Vector::Zero(n);
  Matrix block(n, n + 1);
  block.col(0) = potential_grad_first(kernel, q, origin);
  block.rightCols(n) = potential_cross_hessian(kernel, q, origin);
  return block;
}

Matrix equilibrium_gram(const LagrangianKernel& kernel) {
  const Index n = kernel.dim();
  const Vector origin = Vector::Zero(n);
  Matrix k0(n + 1, n + 1);
  k0(0, 0) = potential_value(kernel, origin, origin);
  k0.block(0, 1, 1, n) = potential_grad_second(kernel, origin, origin).transpose();
  k0.block(1, 0, n, 1) = potential_grad_first(kernel, origin, origin);
  k0.bottomRightCorner(n, n) = potential_cross_hessian(kernel, origin, origin);
  return k0;
}

}  // namespace lgp
