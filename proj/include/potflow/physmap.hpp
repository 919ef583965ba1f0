#pragma once

// Physical-plane reconstruction. Each streamline psi = const is advanced in
// phi with the trapezoid rule on x_phi = cos(theta)/q, y_phi = sin(theta)/q,
// seeded on the inlet curve. The cross relations x_psi = -sin(theta)/(rho q),
// y_psi = cos(theta)/(rho q) serve only as an a-posteriori closure check.

#include <cmath>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "potflow/errors.hpp"
#include "potflow/gas.hpp"
#include "potflow/march.hpp"
#include "potflow/nozzle.hpp"
#include "potflow/numerics.hpp"

namespace potflow {

struct FieldSnapshot {
    double phi = 0.0;
    double psi0 = 0.0, dpsi = 0.0;
    double x_wall = 0.0;
    std::vector<double> x, y, q, theta, rho, mach;
    std::vector<int> vacuum;

    std::size_t size() const { return x.size(); }
    double psi(std::size_t i) const { return psi0 + dpsi * static_cast<double>(i); }
};

/// A single sample point outside the strip (vacuum-region fill).
struct FieldPoint {
    double phi, psi, x, y, theta, q, rho, mach;
    int vacuum;
};

/// Mass flux through a vertical section x = X, assembled from the crossing
/// points of every streamline.
struct SectionCut {
    double X = 0.0;
    std::vector<double> y, flux_density;  // rho u at the crossing
    std::vector<char> hit;

    bool complete() const {
        for (char h : hit)
            if (!h) return false;
        return !hit.empty();
    }
    double flux() const { return num::simpson_nonuniform(y, flux_density); }
};

class Reconstructor {
public:
    Reconstructor(const GasModel& gas, const PotentialInletData& in, const InletCurve& inlet,
                  const WallCurve* wall = nullptr, int stride = 0, std::vector<double> sections = {})
        : gas_(gas), wall_(wall), stride_(stride) {
        const std::size_t n = in.size();
        x_.resize(n);
        y_.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            y_[i] = in.y[i];
            x_[i] = inlet.x(in.y[i]);
        }
        for (double X : sections) {
            SectionCut c;
            c.X = X;
            c.y.assign(n, 0.0);
            c.flux_density.assign(n, 0.0);
            c.hit.assign(n, 0);
            cuts_.push_back(std::move(c));
        }
    }

    /// March sink: called once per accepted state, starting with phi = 0.
    void operator()(const StripState& s) {
        const std::size_t n = s.size();
        std::vector<double> rx(n), ry(n), fl(n);
        for (std::size_t i = 0; i < n; ++i) {
            const auto L = gas_.local(s.h[i]);
            if (!(L.rho * L.q * L.q > 0.0) && s.h[i] < gas_.h_max())
                throw ConsistencyError("non-positive Jacobian rho q^2 at a gas node, phi = " + std::to_string(s.phi));
            rx[i] = std::cos(s.theta[i]) / L.q;
            ry[i] = std::sin(s.theta[i]) / L.q;
            fl[i] = L.rho * L.q * std::cos(s.theta[i]);
            min_u_ = std::min(min_u_, L.q * std::cos(s.theta[i]));
        }
        if (started_) {
            const double d = s.phi - phi_;
            for (std::size_t i = 0; i < n; ++i) {
                const double x_old = x_[i], y_old = y_[i];
                x_[i] += 0.5 * d * (rate_x_[i] + rx[i]);
                y_[i] += 0.5 * d * (rate_y_[i] + ry[i]);
                for (auto& c : cuts_) {
                    if (c.hit[i] || !(x_old < c.X && x_[i] >= c.X)) continue;
                    cross(c, i, d, x_old, y_old, rate_x_[i], rx[i], rate_y_[i], ry[i], flux_[i], fl[i]);
                }
            }
        } else {
            for (auto& c : cuts_)
                for (std::size_t i = 0; i < n; ++i)
                    if (x_[i] == c.X) {
                        c.hit[i] = 1;
                        c.y[i] = y_[i];
                        c.flux_density[i] = fl[i];
                    }
        }
        started_ = true;
        phi_ = s.phi;
        rate_x_.swap(rx);
        rate_y_.swap(ry);
        flux_.swap(fl);
        if (wall_ && s.top == Edge::Wall)
            wall_dev_ = std::max(wall_dev_, std::abs(y_.back() - wall_->f(x_.back())));
        if (stride_ > 0 && s.steps % stride_ == 0) snaps_.push_back(snapshot(s));
    }

    /// Snapshot of the current state at the current positions.
    FieldSnapshot snapshot(const StripState& s) const {
        FieldSnapshot f;
        const std::size_t n = s.size();
        f.phi = s.phi;
        f.psi0 = s.psi0;
        f.dpsi = s.dpsi;
        f.x_wall = s.x_wall;
        f.x = x_;
        f.y = y_;
        f.theta = s.theta;
        f.q.resize(n);
        f.rho.resize(n);
        f.mach.resize(n);
        f.vacuum.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            const auto L = gas_.local(s.h[i]);
            f.q[i] = L.q;
            f.rho[i] = L.rho;
            f.mach[i] = L.sigma > 0.0 ? L.q / std::sqrt(L.sigma) : num::kInf;
            f.vacuum[i] = L.rho == 0.0 ? 1 : 0;
        }
        return f;
    }

    void capture(const StripState& s) {
        if (snaps_.empty() || snaps_.back().phi != s.phi) snaps_.push_back(snapshot(s));
    }

    /// Path-independence check at the current phi: positions integrated
    /// across psi from the axis node against the streamline positions.
    /// Gas nodes only; integration stops at the first vacuum node.
    double closure_defect(const StripState& s) const {
        double X = x_[0], Y = y_[0], worst = 0.0;
        auto cross_rates = [&](std::size_t i, double& a, double& b) {
            const auto L = gas_.local(s.h[i]);
            a = -std::sin(s.theta[i]) / (L.rho * L.q);
            b = std::cos(s.theta[i]) / (L.rho * L.q);
            return L.rho > 0.0;
        };
        double a0, b0;
        if (!cross_rates(0, a0, b0)) return 0.0;
        for (std::size_t i = 1; i < s.size(); ++i) {
            double a1, b1;
            if (!cross_rates(i, a1, b1)) break;
            X += 0.5 * s.dpsi * (a0 + a1);
            Y += 0.5 * s.dpsi * (b0 + b1);
            worst = std::max(worst, std::hypot(X - x_[i], Y - y_[i]));
            a0 = a1;
            b0 = b1;
        }
        return worst;
    }

    const std::vector<double>& x() const { return x_; }
    const std::vector<double>& y() const { return y_; }
    const std::vector<FieldSnapshot>& snapshots() const { return snaps_; }
    const std::vector<SectionCut>& sections() const { return cuts_; }
    double wall_deviation() const { return wall_dev_; }
    double min_u() const { return min_u_; }

private:
    // Crossing of x = X inside one step: cubic Hermite in phi for x and y
    // (end slopes are the known rates), linear for rho u.
    void cross(SectionCut& c, std::size_t i, double d, double x0, double y0, double rx0, double rx1, double ry0,
               double ry1, double f0, double f1) const {
        const double x1 = x_[i], y1 = y_[i];
        auto herm = [&](double t, double a, double b, double sa, double sb) {
            const double t2 = t * t, t3 = t2 * t;
            return (2 * t3 - 3 * t2 + 1) * a + (t3 - 2 * t2 + t) * d * sa + (-2 * t3 + 3 * t2) * b +
                   (t3 - t2) * d * sb;
        };
        double lo = 0.0, hi = 1.0;
        for (int it = 0; it < 60; ++it) {
            const double mid = 0.5 * (lo + hi);
            (herm(mid, x0, x1, rx0, rx1) < c.X ? lo : hi) = mid;
        }
        const double t = 0.5 * (lo + hi);
        c.hit[i] = 1;
        c.y[i] = herm(t, y0, y1, ry0, ry1);
        c.flux_density[i] = f0 + t * (f1 - f0);
    }

    const GasModel& gas_;
    const WallCurve* wall_;
    int stride_;
    bool started_ = false;
    double phi_ = 0.0;
    std::vector<double> x_, y_, rate_x_, rate_y_, flux_;
    std::vector<FieldSnapshot> snaps_;
    std::vector<SectionCut> cuts_;
    double wall_dev_ = 0.0;
    double min_u_ = num::kInf;
};

// ---- export ----------------------------------------------------------------

inline constexpr const char* kCsvHeader = "phi,psi,x,y,u,v,q,rho,mach,vacuum_flag";

struct ExportMeta {
    double gamma = 0.0, m = 0.0;
    std::string outcome;
    double zeta = num::kInf, x0 = num::kInf;
};

namespace detail {
inline void csv_row(std::ostream& os, double phi, double psi, double x, double y, double theta, double q, double rho,
                    double mach, int vac) {
    os << phi << ',' << psi << ',' << x << ',' << y << ',' << q * std::cos(theta) << ',' << q * std::sin(theta) << ','
       << q << ',' << rho << ',' << mach << ',' << vac << '\n';
}
}  // namespace detail

inline void write_csv(std::ostream& os, const std::vector<FieldSnapshot>& snaps,
                      const std::vector<FieldPoint>& extra = {}) {
    os.precision(17);
    os << kCsvHeader << '\n';
    for (const auto& f : snaps)
        for (std::size_t i = 0; i < f.size(); ++i)
            detail::csv_row(os, f.phi, f.psi(i), f.x[i], f.y[i], f.theta[i], f.q[i], f.rho[i], f.mach[i],
                            f.vacuum[i]);
    for (const auto& p : extra) detail::csv_row(os, p.phi, p.psi, p.x, p.y, p.theta, p.q, p.rho, p.mach, p.vacuum);
}

inline void write_csv(const std::string& path, const std::vector<FieldSnapshot>& snaps,
                      const std::vector<FieldPoint>& extra = {}) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open " + path + " for writing");
    write_csv(os, snaps, extra);
    if (!os) throw std::runtime_error("write failed: " + path);
}

namespace detail {
inline nlohmann::json finite_or_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(); }
inline double from_nullable(const nlohmann::json& j) { return j.is_null() ? num::kInf : j.get<double>(); }
}  // namespace detail

inline nlohmann::json fields_to_json(const std::vector<FieldSnapshot>& snaps, const ExportMeta& meta) {
    using nlohmann::json;
    json j;
    j["meta"] = {{"gamma", meta.gamma},
                 {"m", meta.m},
                 {"outcome", meta.outcome},
                 {"zeta", detail::finite_or_null(meta.zeta)},
                 {"x0", detail::finite_or_null(meta.x0)}};
    json grid = json::object();
    if (!snaps.empty()) grid = {{"N", snaps.front().size() - 1}, {"psi0", snaps.front().psi0}, {"dpsi", snaps.front().dpsi}};
    j["grid"] = grid;
    json fields = json::array();
    for (const auto& f : snaps) {
        fields.push_back({{"phi", f.phi},
                          {"psi0", f.psi0},
                          {"dpsi", f.dpsi},
                          {"x_wall", f.x_wall},
                          {"x", f.x},
                          {"y", f.y},
                          {"q", f.q},
                          {"theta", f.theta},
                          {"rho", f.rho},
                          {"mach", f.mach},
                          {"vacuum", f.vacuum}});
    }
    j["fields"] = std::move(fields);
    return j;
}

inline std::vector<FieldSnapshot> fields_from_json(const nlohmann::json& j, ExportMeta* meta = nullptr) {
    if (meta) {
        const auto& m = j.at("meta");
        meta->gamma = m.at("gamma").get<double>();
        meta->m = m.at("m").get<double>();
        meta->outcome = m.at("outcome").get<std::string>();
        meta->zeta = detail::from_nullable(m.at("zeta"));
        meta->x0 = detail::from_nullable(m.at("x0"));
    }
    std::vector<FieldSnapshot> out;
    for (const auto& e : j.at("fields")) {
        FieldSnapshot f;
        f.phi = e.at("phi").get<double>();
        f.psi0 = e.at("psi0").get<double>();
        f.dpsi = e.at("dpsi").get<double>();
        f.x_wall = e.at("x_wall").get<double>();
        f.x = e.at("x").get<std::vector<double>>();
        f.y = e.at("y").get<std::vector<double>>();
        f.q = e.at("q").get<std::vector<double>>();
        f.theta = e.at("theta").get<std::vector<double>>();
        f.rho = e.at("rho").get<std::vector<double>>();
        // Mach is infinite only at vacuum nodes, stored as null.
        for (const auto& v : e.at("mach")) f.mach.push_back(detail::from_nullable(v));
        f.vacuum = e.at("vacuum").get<std::vector<int>>();
        out.push_back(std::move(f));
    }
    return out;
}

inline void write_json(const std::string& path, const std::vector<FieldSnapshot>& snaps, const ExportMeta& meta) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open " + path + " for writing");
    os << fields_to_json(snaps, meta).dump();
    if (!os) throw std::runtime_error("write failed: " + path);
}

inline std::vector<FieldSnapshot> read_json(const std::string& path, ExportMeta* meta = nullptr) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open " + path + " for reading");
    return fields_from_json(nlohmann::json::parse(is), meta);
}

}  // namespace potflow
