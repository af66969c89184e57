#pragma once

#include <vector>

namespace qdc {

enum class Axis { frequency_GHz, wavelength_nm };

/// Sampled intensity on a strictly increasing axis.
struct Spectrum {
  Axis axis = Axis::frequency_GHz;
  std::vector<double> x;
  std::vector<double> y;
};

/// Trapezoidal area.
double area(const Spectrum& s);

/// Scales to unit maximum. Throws std::domain_error if the maximum is not positive.
void normalize_peak(Spectrum& s);

/// Scales to unit trapezoidal area.
void normalize_area(Spectrum& s);

/// Frequency -> wavelength (or back), resorting the axis and transforming the
/// density with |d nu / d lambda| so areas are preserved.
Spectrum to_wavelength(const Spectrum& s);
Spectrum to_frequency(const Spectrum& s);

/// Local maxima refined by a parabola through the three surrounding samples,
/// sorted by decreasing height. Maxima below min_rel_height * max are dropped.
struct Peak {
  double position;
  double height;
};
std::vector<Peak> find_peaks(const Spectrum& s, double min_rel_height = 0.0);

/// Uniform grid of n points on [lo, hi].
std::vector<double> linspace(double lo, double hi, int n);

}  // namespace qdc
