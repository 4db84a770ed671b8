#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

namespace af {

using cd = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;

enum class ErrorKind {
    NotUnitary,
    SingularPolar,
    NotPositiveDefinite,
    LogBranchCut,
    NotSkewHermitian,
    NotSimplyConnected,
    NotFillable,
    BasepointNotInSubcomplex,
    NotConnected,
    CannotExtend,
    NotSimplicial,
    BadCovering,
    EpsilonTooLarge,
    NotNormalized,
    OracleIncomplete,
    DimMismatch,
    ClassUnresolved,
    ComplexMismatch,
    NotIntertwiner,
    NotKillable,
    StabilizedRep,
    NoBoundary,
    UnknownFamily,
    NotCylinder,
    Schema,
    InvalidArgument,
};

inline const char* kind_name(ErrorKind k) {
    switch (k) {
    case ErrorKind::NotUnitary: return "NotUnitary";
    case ErrorKind::SingularPolar: return "SingularPolar";
    case ErrorKind::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorKind::LogBranchCut: return "LogBranchCut";
    case ErrorKind::NotSkewHermitian: return "NotSkewHermitian";
    case ErrorKind::NotSimplyConnected: return "NotSimplyConnected";
    case ErrorKind::NotFillable: return "NotFillable";
    case ErrorKind::BasepointNotInSubcomplex: return "BasepointNotInSubcomplex";
    case ErrorKind::NotConnected: return "NotConnected";
    case ErrorKind::CannotExtend: return "CannotExtend";
    case ErrorKind::NotSimplicial: return "NotSimplicial";
    case ErrorKind::BadCovering: return "BadCovering";
    case ErrorKind::EpsilonTooLarge: return "EpsilonTooLarge";
    case ErrorKind::NotNormalized: return "NotNormalized";
    case ErrorKind::OracleIncomplete: return "OracleIncomplete";
    case ErrorKind::DimMismatch: return "DimMismatch";
    case ErrorKind::ClassUnresolved: return "ClassUnresolved";
    case ErrorKind::ComplexMismatch: return "ComplexMismatch";
    case ErrorKind::NotIntertwiner: return "NotIntertwiner";
    case ErrorKind::NotKillable: return "NotKillable";
    case ErrorKind::StabilizedRep: return "StabilizedRep";
    case ErrorKind::NoBoundary: return "NoBoundary";
    case ErrorKind::UnknownFamily: return "UnknownFamily";
    case ErrorKind::NotCylinder: return "NotCylinder";
    case ErrorKind::Schema: return "Schema";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    }
    return "Unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorKind k, const std::string& what)
        : std::runtime_error(std::string(kind_name(k)) + ": " + what), kind_(k) {}
    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

struct NumericPolicy {
    double unitarity_tol = 1e-10;
    double singularity_tol = 1e-8;
    double hermitian_tol = 1e-9;
    double branch_tol = 1e-9;
    double normalized_tol = 1.0;
};

inline const NumericPolicy& default_policy() {
    static const NumericPolicy p{};
    return p;
}

inline Mat identity(int n) { return Mat::Identity(n, n); }

// largest singular value
inline double op_norm(const Mat& a) {
    if (a.size() == 0) return 0.0;
    Eigen::JacobiSVD<Mat> svd(a);
    return svd.singularValues()(0);
}

inline double unitarity_defect(const Mat& u) {
    if (u.rows() != u.cols()) return INFINITY;
    return op_norm(u.adjoint() * u - identity(u.cols()));
}

inline void require_unitary(const Mat& u, const NumericPolicy& pol = default_policy()) {
    double d = unitarity_defect(u);
    if (!(d <= pol.unitarity_tol))
        throw Error(ErrorKind::NotUnitary, "unitarity defect " + std::to_string(d));
}

inline bool is_hermitian(const Mat& a, double tol) {
    return a.rows() == a.cols() && op_norm(a - a.adjoint()) <= tol * std::max(1.0, op_norm(a));
}

// (A*A)^{-1/2} for positive definite A*A; a is assumed square
inline Mat inv_sqrt_psd(const Mat& a, const NumericPolicy& pol = default_policy()) {
    if (!is_hermitian(a, pol.hermitian_tol))
        throw Error(ErrorKind::NotPositiveDefinite, "matrix is not Hermitian");
    Eigen::SelfAdjointEigenSolver<Mat> es(a);
    const auto& ev = es.eigenvalues();
    if (ev.size() > 0 && !(ev(0) > pol.singularity_tol))
        throw Error(ErrorKind::NotPositiveDefinite,
                    "smallest eigenvalue " + std::to_string(ev(0)));
    Eigen::VectorXd d = ev.array().rsqrt();
    return es.eigenvectors() * d.cast<cd>().asDiagonal() * es.eigenvectors().adjoint();
}

// unitary factor of the polar decomposition; also valid for tall isometric frames
inline Mat polar_unitary(const Mat& a, const NumericPolicy& pol = default_policy()) {
    if (a.cols() == 0) return a;
    Mat g = a.adjoint() * a;
    g = (g + g.adjoint()) / 2.0;
    Eigen::SelfAdjointEigenSolver<Mat> es(g);
    double smin = std::sqrt(std::max(0.0, es.eigenvalues()(0)));
    if (!(smin > pol.singularity_tol))
        throw Error(ErrorKind::SingularPolar, "smallest singular value " + std::to_string(smin));
    Eigen::VectorXd d = es.eigenvalues().array().rsqrt();
    Mat w = a * (es.eigenvectors() * d.cast<cd>().asDiagonal() * es.eigenvectors().adjoint());
    // one Newton-Schulz step
    w = w * (3.0 * identity(w.cols()) - w.adjoint() * w) / 2.0;
    return w;
}

// skew-Hermitian principal logarithm of a unitary
inline Mat principal_log_unitary(const Mat& u, const NumericPolicy& pol = default_policy()) {
    require_unitary(u, NumericPolicy{std::max(pol.unitarity_tol, 1e-9)});
    const int n = static_cast<int>(u.rows());
    if (n == 0) return u;
    Eigen::ComplexSchur<Mat> cs(u);
    const Mat& t = cs.matrixT();
    Vec lg(n);
    for (int i = 0; i < n; ++i) {
        double ang = std::arg(t(i, i));
        if (std::abs(ang) > std::numbers::pi - pol.branch_tol)
            throw Error(ErrorKind::LogBranchCut, "eigenvalue at angle " + std::to_string(ang));
        lg(i) = cd(0.0, ang);
    }
    // a unitary Schur form is diagonal up to roundoff
    Mat l = cs.matrixU() * lg.asDiagonal() * cs.matrixU().adjoint();
    return (l - l.adjoint()) / 2.0;
}

inline Mat exp_skew(const Mat& h, const NumericPolicy& pol = default_policy()) {
    if (h.rows() != h.cols())
        throw Error(ErrorKind::NotSkewHermitian, "non-square argument");
    if (op_norm(h + h.adjoint()) > pol.hermitian_tol * std::max(1.0, op_norm(h)))
        throw Error(ErrorKind::NotSkewHermitian, "argument is not skew-Hermitian");
    if (h.rows() == 0) return h;
    Mat herm = cd(0, -1) * h;
    herm = (herm + herm.adjoint()) / 2.0;
    Eigen::SelfAdjointEigenSolver<Mat> es(herm);
    Vec ph = (cd(0, 1) * es.eigenvalues().cast<cd>()).array().exp();
    return es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
}

inline Mat direct_sum(const Mat& a, const Mat& b) {
    Mat r = Mat::Zero(a.rows() + b.rows(), a.cols() + b.cols());
    r.topLeftCorner(a.rows(), a.cols()) = a;
    r.bottomRightCorner(b.rows(), b.cols()) = b;
    return r;
}

}  // namespace af
