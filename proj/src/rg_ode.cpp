#include "tracerlab/rg_ode.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace trl {

nlohmann::json RgTrajectory::to_json() const {
    nlohmann::json pts = nlohmann::json::array();
    for (const auto& p : points)
        pts.push_back({{"log_time", p.log_time}, {"z", p.z}, {"ln_msd", p.ln_msd}});
    return nlohmann::json{
        {"z0", z0}, {"span", span}, {"step", step}, {"tau_offset", tau_offset}, {"points", pts}};
}

double rg_closed_z(double z0, double s) {
    if (z0 == 2.0) return 2.0;
    return 2.0 - 1.0 / (s + 1.0 / (2.0 - z0));
}

double rg_closed_ln_msd(double z0, double s) {
    if (z0 == 2.0) return s;
    double w0 = 1.0 / (2.0 - z0);
    return s + 0.5 * std::log((2.0 * (s + w0) - 1.0) / (2.0 * w0 - 1.0));
}

RgTrajectory rg_ode_integrate(double z0, double span, double step) {
    if (!(z0 > 0.0) || z0 > 2.0)
        throw std::invalid_argument("z0 must lie in (0, 2]: the induced displacement slope 2/z "
                                    "must stay finite and the flow must stay below its fixed point");
    if (!(span > 0.0) || !(step > 0.0)) throw std::invalid_argument("span and step must be > 0");

    RgTrajectory traj;
    traj.z0 = z0;
    traj.span = span;
    traj.step = step;
    traj.tau_offset = z0 == 2.0 ? std::numeric_limits<double>::infinity() : 1.0 / (2.0 - z0);

    auto fz = [](double z) { return (2.0 - z) * (2.0 - z); };
    auto fm = [](double z) { return 2.0 / z; };

    double s = 0.0, z = z0, m = 0.0;
    traj.points.push_back({s, z, m});
    const bool below = z0 < 2.0;
    while (s < span - 1e-15) {
        double h = std::min(step, span - s);
        double k1z = fz(z), k1m = fm(z);
        double z2 = z + 0.5 * h * k1z;
        double k2z = fz(z2), k2m = fm(z2);
        double z3 = z + 0.5 * h * k2z;
        double k3z = fz(z3), k3m = fm(z3);
        double z4 = z + h * k3z;
        double k4z = fz(z4), k4m = fm(z4);
        z += h / 6.0 * (k1z + 2.0 * k2z + 2.0 * k3z + k4z);
        m += h / 6.0 * (k1m + 2.0 * k2m + 2.0 * k3m + k4m);
        s += h;
        if (below && z >= 2.0)
            throw std::runtime_error("flow reached its fixed point z=2 during integration; the "
                                     "trajectory left the basin the scaling law describes");
        traj.points.push_back({s, z, m});
    }
    return traj;
}

} // namespace trl
