#ifndef NFISAC_GEOMETRY_HPP
#define NFISAC_GEOMETRY_HPP

#include <Eigen/Dense>

#include "nfisac/numkernel.hpp"

// Uniform linear array geometry: steering and focusing vectors, field-region
// boundaries, beam-focusing gain loss, and the bistatic transmit/receive
// coordinate transform. Angles are radians from broadside, distances meters,
// all measured from the array center.

namespace nfisac {

// Nominal propagation speed. The usual radio-engineering convention (3e8,
// not the exact SI value) so 30 GHz maps to a 1 cm wavelength exactly.
inline constexpr double kSpeedOfLight = 3.0e8;

double wavelength_from_carrier(double carrier_hz);

struct ArrayConfig {
    int n_elements = 0;
    double spacing = 0.0;     // meters
    double wavelength = 0.0;  // meters

    ArrayConfig() = default;
    ArrayConfig(int n, double d, double lambda);

    // Largest element-center separation, the aperture D used for the field
    // boundaries.
    double aperture() const { return (n_elements - 1) * spacing; }

    // Signed element offset from the array center in units of the spacing:
    // (2n - N + 1)/2 for n = 0..N-1. Half-integers for even N.
    double delta(int n) const { return 0.5 * (2.0 * n - n_elements + 1); }

    bool half_wavelength_spacing() const;
};

struct PolarCoord {
    double range = 0.0;  // meters, > 0
    double angle = 0.0;  // radians, strictly inside (-pi/2, pi/2)

    PolarCoord() = default;
    PolarCoord(double r, double theta);
};

// Fraunhofer distance 2 D^2 / lambda: beyond it the planar wavefront model
// holds, below it the array is in the radiating near field.
double fraunhofer_distance(double aperture, double wavelength);

// Lower edge of the radiating near field, 0.62 sqrt(D^3 / lambda).
double fresnel_boundary(double aperture, double wavelength);

// Plane-wave steering vector, entry n = exp(j 2 pi delta_n d sin(theta) / lambda).
CVector far_steering(const ArrayConfig& cfg, double angle);

// Spherical-wave focusing vector for a source at (r, theta): entry
// n = exp(-j 2 pi (r_n - r) / lambda) with r_n the exact element-to-source
// distance. Amplitude taper across elements is ignored; |entry| = 1.
CVector near_focusing(const ArrayConfig& cfg, const PolarCoord& p);

// Second-order Fresnel expansion of near_focusing:
// entry n = exp(-j pi (delta_n^2 d^2 cos^2(theta)/(r lambda)
//                      - delta_n (2 d / lambda) sin(theta))).
CVector fresnel_focusing(const ArrayConfig& cfg, const PolarCoord& p);

// Integer phase-pairing matrix behind the closed-form gain loss. Upper
// triangular (N/2-1) x (N/2-1); entry (i,j), 1-based, i <= j:
// (i-1)^2 - j^2 + (N-1)(j+1-i). Requires even N >= 4.
Eigen::MatrixXi fresnel_w_matrix(int n_elements);

// Exact focusing gain loss of a far-field beamformer applied to a near-field
// source: 1 - |a(theta)^H a(r,theta)| / N. In [0, 1].
double gain_loss_exact(const ArrayConfig& cfg, const PolarCoord& p);

// Closed-form approximation,
// 1 - sqrt(2N + 8 sum_{i<=j} cos(lambda pi cos^2(theta)/(4r) * w_ij)) / N.
// Valid for even N and half-wavelength spacing; exactly 0 at theta = +-pi/2.
double gain_loss_approx(const ArrayConfig& cfg, const PolarCoord& p);

// Bistatic layout: transmit and receive arrays collinear, centers separated
// by (N_t + N_r) d / 2. Maps target coordinates seen from the transmit array
// center to coordinates seen from the receive array center. The transform is
// an involution: applying it twice returns the input, so the inverse mapping
// (receive to transmit) is the same function with the roles swapped.
PolarCoord rx_geometry(const PolarCoord& tx, const ArrayConfig& cfg_tx,
                       const ArrayConfig& cfg_rx);
PolarCoord tx_geometry(const PolarCoord& rx, const ArrayConfig& cfg_tx,
                       const ArrayConfig& cfg_rx);

}  // namespace nfisac

#endif
