#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <Eigen/LU>
#include <Eigen/SparseCore>

namespace beamnet {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Vec12 = Eigen::Matrix<double, 12, 1>;
using Mat12 = Eigen::Matrix<double, 12, 12>;
using SparseMat = Eigen::SparseMatrix<double>;

/// Cross product with the local axis direction (1,0,0).
inline Vec3 axial_cross(const Vec3& a) { return Vec3(0.0, -a.z(), a.y()); }

}  // namespace beamnet
