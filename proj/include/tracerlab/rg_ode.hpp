#pragma once

#include <vector>

#include "json.hpp"

namespace trl {

// Autonomous flow dz/ds = (2 - z)^2 in s = ln t, coupled to the displacement
// law d(ln msd)/ds = 2/z. Solutions below the z = 2 fixed point satisfy
// z(s) = 2 - 1/(s + w0) with w0 = 1/(2 - z0), and the induced msd integrates
// in closed form to ln msd = (s + w0) + ln sqrt(2(s + w0) - 1) + const.
struct RgPoint {
    double log_time = 0.0; // s, relative to the trajectory start
    double z = 0.0;
    double ln_msd = 0.0;   // normalized to 0 at the start
};

struct RgTrajectory {
    double z0 = 1.0;
    double span = 1.0;
    double step = 1e-3;
    // ln(t0/tau) implied by z0; infinite at the fixed point z0 = 2.
    double tau_offset = 1.0;
    std::vector<RgPoint> points;

    nlohmann::json to_json() const;
};

// Closed forms, normalized like the trajectory (s measured from the start).
double rg_closed_z(double z0, double s);
double rg_closed_ln_msd(double z0, double s);

// Classic 4th-order Runge-Kutta in s. Requires 0 < z0 <= 2 (the msd slope
// 2/z must stay finite); z0 = 2 yields the constant fixed-point trajectory.
// Throws std::runtime_error if z reaches 2 from below during integration.
RgTrajectory rg_ode_integrate(double z0, double span, double step = 1e-3);

} // namespace trl
