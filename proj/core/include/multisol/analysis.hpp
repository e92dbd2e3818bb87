#pragma once

#include <vector>

#include <Eigen/Dense>

#include "multisol/aobd.hpp"
#include "multisol/galerkin.hpp"

namespace multisol::analysis {

/// Coefficients of u(r, theta - angle): the field turned by `angle` in the (r, theta) plane.
/// On a disk this is a rigid rotation and maps solutions to solutions.
SpectralCoefficients rotate(const SpectralCoefficients& xi, double angle);

/// Coefficients of u(r, -theta) (reflection across the x-axis).
SpectralCoefficients reflect(const SpectralCoefficients& xi);

/// min over angle of ||rotate(a, angle) - b||, with the minimizing angle.
struct RotationMatch {
  double distance;
  double angle;
};
RotationMatch rotation_distance(const SpectralCoefficients& a, const SpectralCoefficients& b);

/// Rotation making the field as even in theta as possible (sine coefficients minimized),
/// so its pattern lines up with the x-axis.
struct Alignment {
  SpectralCoefficients xi;
  double angle;
  double odd_part;  ///< remaining ||alpha|| / ||xi||
};
Alignment align_to_axes(const SpectralCoefficients& xi);

/// Groups of records equal up to a rotation (tolerance relative to max(1, ||xi||)).
std::vector<std::vector<int>> rotation_classes(const std::vector<aobd::SolutionRecord>& records, double tol = 1e-5);

/// Field on a tensor polar grid: rows r_k = k / (nr - 1), columns theta_p = 2 pi p / ntheta.
struct PolarGrid {
  std::vector<double> r;
  std::vector<double> theta;
  Eigen::MatrixXd u;
};
PolarGrid sample(const DiscreteProblem& dp, const Eigen::VectorXd& xi, int nr, int ntheta);

struct Peak {
  double r;
  double theta;  ///< parametric angle in [0, 2 pi)
  double value;  ///< u at the peak (signed)
};

/// Local maxima of |u| on a polar grid whose height is at least `rel_height` times max |u|.
/// Neighbours are the 8 surrounding grid points, periodic in theta; the r = 0 row is one point.
std::vector<Peak> find_peaks(const PolarGrid& grid, double rel_height = 0.5);

/// Distance in parametric angle from theta to the nearest of {0, pi/2, pi, 3 pi/2}, which are the
/// curvature extrema of a non-circular ellipse boundary.
double angle_to_curvature_extremum(double theta);

/// Radius of the disk with the same area as {|u| >= max|u| / 2}.
double half_height_radius(const DiscreteProblem& dp, const Eigen::VectorXd& xi, int nr = 400, int ntheta = 256);

/// int u_x^2 and int u_y^2 over the domain.
struct GradientSplit {
  double ux2;
  double uy2;
};
GradientSplit gradient_split(const DiscreteProblem& dp, const Eigen::VectorXd& xi);

/// min and max of u on a polar grid.
std::pair<double, double> field_range(const DiscreteProblem& dp, const Eigen::VectorXd& xi, int nr = 41,
                                      int ntheta = 64);

}  // namespace multisol::analysis
