#pragma once

#include <string>
#include <vector>

#include "vpsal/boundary.hpp"
#include "vpsal/lines.hpp"
#include "vpsal/raster.hpp"

namespace vpsal {

/// Denominator of the Gaussian exponent. `FourSigmaSq` evaluates
/// exp(-d^2 / (4 sigma^2)), whose effective standard deviation is sigma*sqrt(2).
enum class GaussianForm { FourSigmaSq, TwoSigmaSq };

struct VpChannelConfig {
    double sigma_vp = 25.0;
    double neighbor_radius = 10.0;
    GaussianForm form = GaussianForm::FourSigmaSq;

    void validate() const;
};

struct VpEstimate {
    Point2 location;
    Point2 seed;
    int support = 0;
    std::vector<Point2> members;
};

enum class AnnotationSource { Human, Detector };

struct Annotation {
    Point2 vp_center;
    AnnotationSource source = AnnotationSource::Human;
};

struct Cluster {
    Point2 seed;
    std::vector<Point2> members;
};

/// Counts, for every point, the other points strictly closer than `radius`.
/// The point with the most neighbours wins (ties go to the smallest (y, x));
/// its members are its neighbours plus itself.
Cluster neighbor_cluster(const std::vector<IntersectionPoint>& points, double radius);

/// Intermediate products of a detection run, kept for diagnostics.
struct DetectionTrace {
    ScalarMap boundary;
    BinaryMap binary;
    std::vector<DetectedLine> lines;
    std::vector<IntersectionPoint> points;
};

/// Grayscale, boundary map, adaptive binarization, Hough lines, pairwise
/// intersections, densest neighbourhood; the VP is the mean of that
/// neighbourhood. Throws NoVanishingPoint when fewer than two lines are found
/// or no intersection falls inside the image.
VpEstimate detect_vp(const RasterImage& img, const BoundaryConfig& bcfg = {}, const HoughParams& hp = {},
                     const VpChannelConfig& vcfg = {}, DetectionTrace* trace = nullptr);

/// Unnormalized radial Gaussian 1/(2 pi sigma^2) * exp(-d^2 / (k sigma^2)).
double gaussian_value(double dx, double dy, double sigma, GaussianForm form = GaussianForm::FourSigmaSq);

/// Gaussian channel centred at `center`, min-max normalized so the peak is 1.
ScalarMap vp_gaussian(int width, int height, Point2 center, double sigma,
                      GaussianForm form = GaussianForm::FourSigmaSq);

/// Unnormalized variant of `vp_gaussian`.
ScalarMap vp_gaussian_raw(int width, int height, Point2 center, double sigma,
                          GaussianForm form = GaussianForm::FourSigmaSq);

/// Pixel-centre of the image: ((width-1)/2, (height-1)/2).
Point2 image_center(int width, int height);

ScalarMap center_gaussian(int width, int height, double sigma_cg, GaussianForm form = GaussianForm::FourSigmaSq);

double detector_error(const VpEstimate& est, const Annotation& ann);
double detector_error(Point2 est, Point2 truth);

/// Counts per [k*width, (k+1)*width) bin; the histogram grows to cover the largest value.
std::vector<int> error_histogram(const std::vector<double>& errors, double bin_width = 5.0);

std::string to_string(AnnotationSource source);

}  // namespace vpsal
