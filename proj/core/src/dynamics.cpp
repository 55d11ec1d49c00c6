#include <nhlab/dynamics.hpp>

#include <algorithm>
#include <cmath>

namespace nhlab {

namespace {

double fd_step(double x) { return std::max(1e-6, 1e-6 * std::abs(x)); }

// Central differences of a matrix-valued map along each coordinate.
std::vector<Mat> fd_dq(const std::function<Mat(const Vec &, double)> &f, const Vec &q, double t) {
    std::vector<Mat> out;
    out.reserve(q.size());
    Vec qp = q;
    Vec qm = q;
    for (Eigen::Index i = 0; i < q.size(); ++i) {
        const double h = fd_step(q[i]);
        qp[i] = q[i] + h;
        qm[i] = q[i] - h;
        out.push_back((f(qp, t) - f(qm, t)) / (2.0 * h));
        qp[i] = q[i];
        qm[i] = q[i];
    }
    return out;
}

// Jacobian (columns ∂f/∂q_j) of a vector-valued map.
Mat fd_jacobian(const std::function<Vec(const Vec &, double)> &f, const Vec &q, double t,
                Eigen::Index rows) {
    Mat J(rows, q.size());
    Vec qp = q;
    Vec qm = q;
    for (Eigen::Index j = 0; j < q.size(); ++j) {
        const double h = fd_step(q[j]);
        qp[j] = q[j] + h;
        qm[j] = q[j] - h;
        J.col(j) = (f(qp, t) - f(qm, t)) / (2.0 * h);
        qp[j] = q[j];
        qm[j] = q[j];
    }
    return J;
}

template <class F> auto fd_dt(const F &f, const Vec &q, double t) {
    const double h = fd_step(t);
    return ((f(q, t + h) - f(q, t - h)) / (2.0 * h)).eval();
}

Vec cross3(const Vec &a, const Vec &b) {
    return Vec3(a.head<3>()).cross(Vec3(b.head<3>()));
}

} // namespace

void check_state(const VelocityState &state, int expected_dim) {
    require(state.q.size() >= 2, "state dimension must be at least 2");
    require(state.q.size() == state.qdot.size(), "dim(q) != dim(qdot)");
    require(expected_dim < 0 || state.q.size() == expected_dim,
            "state dimension " + std::to_string(state.q.size()) + " does not match system dimension " +
                std::to_string(expected_dim));
    require(state.q.allFinite() && state.qdot.allFinite() && std::isfinite(state.t),
            "state has non-finite entries");
}

Mat MechanicalLagrangian::M(const Vec &q, double t) const { return mass_matrix(q, t); }

Vec MechanicalLagrangian::b(const Vec &q, double t) const {
    return linear_term ? linear_term(q, t) : Vec::Zero(n);
}

double MechanicalLagrangian::V(const Vec &q, double t) const {
    return potential ? potential(q, t) : 0.0;
}

Mat AffineConstraint::S(const Vec &q, double t) const { return matrix(q, t); }

Vec AffineConstraint::s(const Vec &q, double t) const {
    return offset ? offset(q, t) : Vec::Zero(k);
}

const NamedIntegral *NonholonomicSystem::find_integral(const std::string &key) const {
    auto it = std::find_if(integrals.begin(), integrals.end(),
                           [&](const NamedIntegral &i) { return i.name == key; });
    return it == integrals.end() ? nullptr : &*it;
}

void require_full_rank(const Mat &S) {
    Eigen::JacobiSVD<Mat> svd(S);
    const auto &sv = svd.singularValues();
    if (sv.size() == 0 || sv.size() < S.rows() || !(sv.minCoeff() > 1e-10 * sv.maxCoeff())) {
        throw SingularConstraintError("constraint matrix S is rank deficient");
    }
}

Mat kernel_basis(const Mat &S) {
    Eigen::JacobiSVD<Mat> svd(S, Eigen::ComputeFullV);
    const Eigen::Index n = S.cols();
    const auto &sv = svd.singularValues();
    const double cut = sv.size() > 0 ? 1e-10 * sv.maxCoeff() : 0.0;
    Eigen::Index rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i) {
        if (sv[i] > cut) {
            ++rank;
        }
    }
    return svd.matrixV().rightCols(n - rank);
}

NonholonomicSystem make_system(std::string name, MechanicalLagrangian lagrangian,
                               AffineConstraint constraint, ChartMeta chart,
                               std::vector<NamedIntegral> integrals, const Vec &probe) {
    const int n = lagrangian.n;
    require(n >= 2, "configuration dimension must be at least 2");
    require(static_cast<bool>(lagrangian.mass_matrix), "mass matrix callback missing");
    require(static_cast<bool>(constraint.matrix), "constraint matrix callback missing");
    require(constraint.n == n, "constraint column count differs from Lagrangian dimension");
    require(constraint.k >= 1, "constraint must have at least one row");
    const int r = n - constraint.k;
    require(r > 1 && r < n, "constraint rank r = n - k must satisfy 1 < r < n");
    require(probe.size() == n, "probe point has wrong dimension");

    const Mat M = lagrangian.M(probe, 0.0);
    require(M.rows() == n && M.cols() == n, "mass matrix has wrong shape");
    require((M - M.transpose()).norm() <= 1e-12 * std::max(1.0, M.norm()), "mass matrix not symmetric");
    require(Eigen::LLT<Mat>(M).info() == Eigen::Success, "mass matrix not positive definite");

    const Mat S = constraint.S(probe, 0.0);
    require(S.rows() == constraint.k && S.cols() == n, "constraint matrix has wrong shape");
    require_full_rank(S);

    if (chart.spin_offset) {
        const int o = *chart.spin_offset;
        require(o >= 0 && o + 3 <= n, "spin block out of range");
        const Mat block = M.block(o, o, 3, 3);
        const double m = block(0, 0);
        const double scale = std::max(1.0, std::abs(m));
        Mat coupling = M.block(o, 0, 3, n);
        coupling.middleCols(o, 3).setZero();
        require((block - m * Mat::Identity(3, 3)).norm() <= 1e-12 * scale && coupling.norm() <= 1e-12 * scale,
                "spin pseudo-coordinates require isotropic, decoupled inertia");
    }

    NonholonomicSystem sys;
    sys.name = std::move(name);
    sys.lagrangian = std::move(lagrangian);
    sys.constraint = std::move(constraint);
    sys.chart = std::move(chart);
    sys.integrals = std::move(integrals);
    return sys;
}

NonholonomicSystem register_integral(NonholonomicSystem sys, std::string name, ScalarField fn) {
    require(static_cast<bool>(fn), "integral callback missing");
    sys.integrals.push_back({std::move(name), std::move(fn)});
    return sys;
}

double lagrangian_value(const MechanicalLagrangian &L, const VelocityState &state) {
    check_state(state, L.n);
    const Mat M = L.M(state.q, state.t);
    return 0.5 * state.qdot.dot(M * state.qdot) + L.b(state.q, state.t).dot(state.qdot) -
           L.V(state.q, state.t);
}

double energy(const MechanicalLagrangian &L, const VelocityState &state) {
    check_state(state, L.n);
    const Mat M = L.M(state.q, state.t);
    return 0.5 * state.qdot.dot(M * state.qdot) + L.V(state.q, state.t);
}

Vec momentum(const MechanicalLagrangian &L, const VelocityState &state) {
    check_state(state, L.n);
    return L.M(state.q, state.t) * state.qdot + L.b(state.q, state.t);
}

Vec constraint_residual(const AffineConstraint &K, const VelocityState &state) {
    check_state(state, K.n);
    return K.S(state.q, state.t) * state.qdot + K.s(state.q, state.t);
}

Vec representative_xi(const AffineConstraint &K, const Vec &q, double t) {
    require(q.size() == K.n, "configuration dimension mismatch");
    const Mat S = K.S(q, t);
    require_full_rank(S);
    const Vec s = K.s(q, t);
    if (s.isZero(0.0)) {
        return Vec::Zero(K.n);
    }
    // ξ = −Sᵀ (S Sᵀ)⁻¹ s lies in range(Sᵀ) = (ker S)⊥.
    Eigen::HouseholderQR<Mat> qr(S.transpose());
    const Mat R = qr.matrixQR().topRows(K.k).triangularView<Eigen::Upper>();
    const Vec y = R.transpose().triangularView<Eigen::Lower>().solve(-s);
    Vec xi = qr.householderQ() * (Vec(K.n) << y, Vec::Zero(K.n - K.k)).finished();
    return xi;
}

Vec generalized_force(const MechanicalLagrangian &L, const ChartMeta &chart, const VelocityState &state) {
    const Vec &q = state.q;
    const Vec &v = state.qdot;
    const double t = state.t;
    const int n = L.n;

    const std::vector<Mat> dM = L.mass_matrix_dq ? L.mass_matrix_dq(q, t) : fd_dq(L.mass_matrix, q, t);
    Vec f = Vec::Zero(n);
    Mat Mdot = Mat::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        Mdot += dM[i] * v[i];
        f[i] += 0.5 * v.dot(dM[i] * v);
    }
    f -= Mdot * v;

    if (L.linear_term) {
        const Mat B = L.linear_term_dq ? L.linear_term_dq(q, t) : fd_jacobian(L.linear_term, q, t, n);
        f += (B.transpose() - B) * v;
        if (L.time_dependent) {
            f -= L.linear_term_dt ? L.linear_term_dt(q, t) : fd_dt(L.linear_term, q, t);
        }
    }
    if (L.time_dependent) {
        const Mat Mt = L.mass_matrix_dt ? L.mass_matrix_dt(q, t) : fd_dt(L.mass_matrix, q, t);
        f -= Mt * v;
    }
    if (L.potential) {
        if (L.potential_gradient) {
            f -= L.potential_gradient(q, t);
        } else {
            auto V = [&](const Vec &x, double tt) { return (Vec(1) << L.potential(x, tt)).finished(); };
            f -= fd_jacobian(V, q, t, 1).row(0).transpose();
        }
    }
    if (chart.spin_offset) {
        const int o = *chart.spin_offset;
        const Vec p = L.M(q, t) * v + L.b(q, t);
        f.segment(o, 3) += cross3(v.segment(o, 3), p.segment(o, 3));
    }
    return f;
}

Vec constraint_acceleration_rhs(const AffineConstraint &K, const VelocityState &state) {
    const Vec &q = state.q;
    const Vec &v = state.qdot;
    const double t = state.t;

    const std::vector<Mat> dS = K.matrix_dq ? K.matrix_dq(q, t) : fd_dq(K.matrix, q, t);
    Vec rhs = Vec::Zero(K.k);
    for (int i = 0; i < K.n; ++i) {
        if (v[i] != 0.0) {
            rhs -= v[i] * (dS[i] * v);
        }
    }
    if (K.offset) {
        const Mat ds = K.offset_dq ? K.offset_dq(q, t) : fd_jacobian(K.offset, q, t, K.k);
        rhs -= ds * v;
    }
    if (K.time_dependent) {
        const Mat St = K.matrix_dt ? K.matrix_dt(q, t) : fd_dt(K.matrix, q, t);
        rhs -= St * v;
        if (K.offset) {
            rhs -= K.offset_dt ? K.offset_dt(q, t) : fd_dt(K.offset, q, t);
        }
    }
    return rhs;
}

DynamicsOutput eval_dynamics(const NonholonomicSystem &sys, const VelocityState &state,
                             const DynamicsOptions &options) {
    const int n = sys.dim();
    const int k = sys.constraint.k;
    check_state(state, n);

    const Mat M = sys.lagrangian.M(state.q, state.t);
    const Mat S = sys.constraint.S(state.q, state.t);
    if (options.check_manifold) {
        const Vec residual = S * state.qdot + sys.constraint.s(state.q, state.t);
        if (!(residual.norm() <= options.manifold_tolerance)) {
            throw OffManifoldError("state is off the constraint fiber (residual " +
                                   std::to_string(residual.norm()) + ")");
        }
    }

    const Vec f = generalized_force(sys.lagrangian, sys.chart, state);
    const Vec rhs = constraint_acceleration_rhs(sys.constraint, state);

    DynamicsOutput out;
    if (n + k <= options.schur_threshold) {
        // [M Sᵀ; S 0] (q̈, μ) = (f, rhs), λ = −μ.
        Mat kkt = Mat::Zero(n + k, n + k);
        kkt.topLeftCorner(n, n) = M;
        kkt.topRightCorner(n, k) = S.transpose();
        kkt.bottomLeftCorner(k, n) = S;
        Vec b(n + k);
        b << f, rhs;
        Eigen::FullPivLU<Mat> lu(kkt);
        if (lu.rank() < n + k) {
            throw DegenerateConstraintError("saddle-point matrix is singular");
        }
        const Vec x = lu.solve(b);
        out.qddot = x.head(n);
        out.lambda = -x.tail(k);
    } else {
        Eigen::LLT<Mat> llt(M);
        if (llt.info() != Eigen::Success) {
            throw DegenerateConstraintError("mass matrix is not positive definite");
        }
        const Mat MinvSt = llt.solve(S.transpose());
        const Vec Minvf = llt.solve(f);
        Eigen::LLT<Mat> schur(S * MinvSt);
        if (schur.info() != Eigen::Success) {
            throw DegenerateConstraintError("Schur complement S M⁻¹ Sᵀ is singular");
        }
        out.lambda = schur.solve(rhs - S * Minvf);
        out.qddot = Minvf + MinvSt * out.lambda;
    }
    out.reaction = S.transpose() * out.lambda;
    return out;
}

Vec project_velocity(const NonholonomicSystem &sys, const Vec &q, const Vec &qdot, double t) {
    const int n = sys.dim();
    require(q.size() == n && qdot.size() == n, "dimension mismatch in project_velocity");
    const Mat S = sys.constraint.S(q, t);
    require_full_rank(S);
    const Vec s = sys.constraint.s(q, t);
    Eigen::LLT<Mat> llt(sys.lagrangian.M(q, t));
    const Mat MinvSt = llt.solve(S.transpose());
    Eigen::LDLT<Mat> schur(S * MinvSt);

    Vec v = qdot;
    for (int pass = 0; pass < 2; ++pass) {
        const Vec residual = S * v + s;
        if (residual.isZero(0.0)) {
            break;
        }
        v -= MinvSt * schur.solve(residual);
    }
    return v;
}

} // namespace nhlab
