// Acceptance suite: runs every acceptance criterion at its stated tolerance
// and prints one PASS/FAIL line per criterion. Exit code is the number of
// failed criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "mc_oracle.hpp"
#include "relaycap/effcap.hpp"
#include "relaycap/queuesim.hpp"
#include "relaycap/rng.hpp"
#include "relaycap/solver.hpp"

using namespace relaycap;

namespace {

const BlockConfig kBlock{0.002, 1e5}; // TB = 200

struct Check {
    bool ok = true;
    std::string detail;

    void require(bool cond, const std::string& what) {
        if (!cond && ok) {
            ok = false;
            detail = what;
        }
    }
};

int g_failures = 0;

void run_criterion(int id, const std::string& name, double time_limit_s,
                   const std::function<void(Check&)>& body) {
    Check chk;
    const auto start = std::chrono::steady_clock::now();
    try {
        body(chk);
    } catch (const std::exception& ex) {
        chk.require(false, std::string("exception: ") + ex.what());
    }
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (elapsed >= time_limit_s)
        chk.require(false, "time limit exceeded");
    std::printf("%s criterion %d (%s) [%.1fs]%s%s\n", chk.ok ? "PASS" : "FAIL", id, name.c_str(),
                elapsed, chk.ok ? "" : ": ", chk.detail.c_str());
    std::fflush(stdout);
    g_failures += chk.ok ? 0 : 1;
}

SystemConfig unit_gain_config() {
    SystemConfig cfg;
    cfg.link1 = {FadingModel{RayleighFading{1.0}}, 1.0};
    cfg.link2 = {FadingModel{RayleighFading{1.0}}, 10.0};
    cfg.block = kBlock;
    cfg.theta1 = 0.01;
    cfg.theta2 = 0.02;
    return cfg;
}

SystemConfig geometry_config(double d, double snr2_db, double theta2,
                             DuplexMode mode = DuplexMode::FullDuplex) {
    return geometry_to_config({d, 4.0, 1.0, std::pow(10.0, snr2_db / 10.0)}, kBlock, 0.01,
                              theta2, mode);
}

bool close_rel(double a, double b, double tol) {
    return std::abs(a - b) <= tol * std::max(std::abs(a), std::abs(b));
}

// --- criterion 2 helpers ---------------------------------------------------

FadingModel random_fading(Xoshiro256pp& rng) {
    const double pick = rng.next_double();
    auto logu = [&](double lo, double hi) {
        return lo * std::pow(hi / lo, rng.next_double());
    };
    if (pick < 0.4) return RayleighFading{logu(0.1, 100.0)};
    if (pick < 0.6) return PointMassFading{logu(0.2, 5.0)};
    DiscreteFading d;
    const int atoms = 2 + static_cast<int>(rng.next_double() * 3);
    double total = 0.0;
    for (int i = 0; i < atoms; ++i) {
        d.gains.push_back(logu(0.05, 20.0));
        d.probs.push_back(0.05 + rng.next_double());
        total += d.probs.back();
    }
    for (auto& p : d.probs) p /= total;
    return d;
}

SystemConfig random_stable_config(Xoshiro256pp& rng) {
    auto logu = [&](double lo, double hi) {
        return lo * std::pow(hi / lo, rng.next_double());
    };
    for (;;) {
        SystemConfig cfg;
        cfg.link1 = {random_fading(rng), logu(0.1, 100.0)};
        cfg.link2 = {random_fading(rng), logu(0.1, 100.0)};
        cfg.block = kBlock;
        cfg.theta1 = logu(1e-4, 1.0);
        cfg.theta2 = logu(1e-4, 1.0);
        if (stability_check(cfg) == StabilityStatus::Ok) return cfg;
    }
}

} // namespace

int main() {
    // 1. shape of the case-analysis function on the unit-gain config
    run_criterion(1, "case-analysis function shape", 5.0, [](Check& chk) {
        const auto cfg = unit_gain_config();
        const double f0 = f_func(cfg, 0.0);
        chk.require(close_rel(f0, g_rate(cfg, cfg.theta1), 1e-9), "f(0) != g(theta1)");
        chk.require(f_func(cfg, 1e-6) > f0, "forward difference at 0 not positive");
        // concavity on a grid
        const int n = 40;
        const double hi = 0.05;
        std::vector<double> vals;
        double scale = 0.0;
        for (int i = 0; i <= n; ++i) {
            vals.push_back(f_func(cfg, hi * i / n));
            scale = std::max(scale, std::abs(vals.back()));
        }
        for (int i = 1; i < n; ++i) {
            chk.require(vals[i - 1] - 2.0 * vals[i] + vals[i + 1] <= 1e-6 * scale,
                        "second difference positive: f not concave");
        }
        // a zero crossing exists
        bool was_positive = false, crossed = false;
        for (int i = 1; i <= 100; ++i) {
            const double v = f_func(cfg, 0.1 * i / 100);
            if (v > 0.0) was_positive = true;
            if (was_positive && v < 0.0) {
                crossed = true;
                break;
            }
        }
        chk.require(crossed, "no zero crossing found");
    });

    // 2. per-hop effective-capacity bound, randomized
    run_criterion(2, "per-hop bound fuzz, 100 configs", 60.0, [](Check& chk) {
        Xoshiro256pp rng(20250810, 0);
        for (int i = 0; i < 100; ++i) {
            SystemConfig cfg = random_stable_config(rng);
            cfg.mode = (i % 3 == 2) ? DuplexMode::HalfDuplex : DuplexMode::FullDuplex;
            const auto res = effective_capacity(cfg);
            std::ostringstream tag;
            tag << "config " << i << " (" << to_string(res.case_tag) << ")";
            chk.require(res.rate <= res.upper_bound * (1.0 + 1e-9),
                        tag.str() + ": rate above the bound");
            if (cfg.theta1 >= cfg.theta2) {
                chk.require(close_rel(res.rate, res.upper_bound, 1e-9),
                            tag.str() + ": bound not attained with theta1 >= theta2");
            }
        }
    });

    // 3. continuity at the II/III boundary
    run_criterion(3, "case-boundary continuity, 10 configs", 60.0, [](Check& chk) {
        std::vector<SystemConfig> configs;
        for (double d : {0.42, 0.46, 0.5, 0.54, 0.58, 0.62}) {
            for (double snr2_db : {7.0, 10.0, 13.0}) {
                if (configs.size() >= 10) break;
                SystemConfig cfg = geometry_config(d, snr2_db, 0.02);
                if (stability_check(cfg) != StabilityStatus::Ok) continue;
                const auto tb = solve_theta_bar(cfg);
                if (tb.status != ThetaBarResult::Status::Found) continue;
                if (tb.value < cfg.theta1 * 1.05) continue;
                cfg.theta2 = tb.value; // remembered via theta2 slot for later
                configs.push_back(cfg);
            }
        }
        chk.require(configs.size() == 10, "could not assemble 10 qualifying configs");
        const double step = 1e-5;
        for (auto& cfg : configs) {
            const double tbar = cfg.theta2;
            auto rate_at = [&](double th2) {
                SystemConfig c = cfg;
                c.theta2 = th2;
                return effective_capacity_full_duplex(c);
            };
            const auto left = rate_at(tbar - step);
            chk.require(left.case_tag == CaseTag::FD_II, "left of the boundary not case II");
            const double r1 = rate_at(tbar + step).rate;
            const double r2 = rate_at(tbar + 2 * step).rate;
            const double r3 = rate_at(tbar + 3 * step).rate;
            // quadratic extrapolation of the case-III branch back to theta_bar
            const double at_boundary = 3.0 * r1 - 3.0 * r2 + r3;
            chk.require(close_rel(at_boundary, left.rate, 1e-6),
                        "jump at theta_bar exceeds 1e-6 relative");
        }
    });

    // 4. theta2 response at d = 0.5
    run_criterion(4, "theta2 response: flat then decreasing, threshold grows with snr2", 120.0,
                  [](Check& chk) {
        double prev_tbar = 0.0;
        for (double snr2_db : {3.0, 10.0, 20.0}) {
            const auto base = geometry_config(0.5, snr2_db, 0.02);
            const auto tb = solve_theta_bar(base);
            chk.require(tb.status == ThetaBarResult::Status::Found, "theta_bar not found");
            chk.require(tb.value > prev_tbar, "theta_bar not increasing in snr2");
            prev_tbar = tb.value;

            const double ec1 = g_rate(base, base.theta1);
            double prev_rate = 0.0;
            bool in_tail = false;
            for (int i = 0; i < 50; ++i) {
                const double th2 = 1e-4 * std::pow(1.0 / 1e-4, i / 49.0);
                SystemConfig cfg = base;
                cfg.theta2 = th2;
                const auto res = effective_capacity_full_duplex(cfg);
                if (th2 <= tb.value) {
                    chk.require(close_rel(res.rate, ec1, 1e-9),
                                "rate not constant below theta_bar");
                } else {
                    chk.require(res.rate < (in_tail ? prev_rate : ec1),
                                "rate not strictly decreasing beyond theta_bar");
                    in_tail = true;
                    prev_rate = res.rate;
                }
            }
            chk.require(in_tail, "grid never crossed theta_bar");
        }
    });

    // 5. relay-placement sweep
    run_criterion(5, "relay placement: small-theta2 curves coincide, dip for theta2=0.05", 120.0,
                  [](Check& chk) {
        std::vector<double> dip_curve;
        for (int i = 0; i < 15; ++i) {
            const double d = 0.38 + 0.04 * i;
            const auto a = effective_capacity_full_duplex(geometry_config(d, 10.0, 0.001));
            const auto b = effective_capacity_full_duplex(geometry_config(d, 10.0, 0.01));
            chk.require(close_rel(a.rate, b.rate, 1e-9),
                        "theta2=0.001 and 0.01 curves diverge at d=" + std::to_string(d));
            dip_curve.push_back(
                effective_capacity_full_duplex(geometry_config(d, 10.0, 0.05)).rate);
        }
        std::size_t argmin = 0;
        for (std::size_t i = 1; i < dip_curve.size(); ++i)
            if (dip_curve[i] < dip_curve[argmin]) argmin = i;
        chk.require(argmin > 0 && argmin + 1 < dip_curve.size(),
                    "minimum of the theta2=0.05 curve is not interior");
        for (std::size_t i = 1; i < dip_curve.size(); ++i) {
            if (i <= argmin)
                chk.require(dip_curve[i] < dip_curve[i - 1], "not decreasing before the minimum");
            else
                chk.require(dip_curve[i] > dip_curve[i - 1], "not increasing after the minimum");
        }
    });

    // 6. half-duplex theta2 and placement trends
    run_criterion(6, "half-duplex trends", 120.0, [](Check& chk) {
        // theta2 sweep at d = 0.5 for three snr2 levels
        std::vector<std::vector<double>> curves;
        for (double snr2_db : {3.0, 10.0, 20.0}) {
            std::vector<double> rates;
            for (int i = 0; i < 25; ++i) {
                const double th2 = 1e-4 * std::pow(0.3 / 1e-4, i / 24.0);
                rates.push_back(effective_capacity_half_duplex(
                                    geometry_config(0.5, snr2_db, th2, DuplexMode::HalfDuplex))
                                    .rate);
            }
            // constant head, then non-increasing with an eventual strict drop
            chk.require(close_rel(rates[1], rates[0], 1e-9), "no flat head at small theta2");
            bool dropped = false;
            for (std::size_t i = 1; i < rates.size(); ++i) {
                chk.require(rates[i] <= rates[i - 1] * (1.0 + 1e-9), "rate increased in theta2");
                if (rates[i] < rates[i - 1] * (1.0 - 1e-9)) dropped = true;
                if (dropped)
                    chk.require(rates[i] < rates[i - 1],
                                "not strictly decreasing after the flat head");
            }
            chk.require(dropped, "curve never decreases");
            curves.push_back(std::move(rates));
        }
        for (std::size_t i = 0; i < curves[0].size(); ++i) {
            chk.require(curves[2][i] > curves[1][i] && curves[1][i] > curves[0][i],
                        "snr2 ordering violated at a grid point");
        }

        // d sweep at snr2 = 3 dB: curves coincide in the tau0-bound regime
        std::size_t coincide_from = 13;
        for (int i = 12; i >= 0; --i) {
            const double d = 0.46 + 0.04 * i;
            const auto a =
                effective_capacity_half_duplex(geometry_config(d, 3.0, 0.001, DuplexMode::HalfDuplex));
            const auto b =
                effective_capacity_half_duplex(geometry_config(d, 3.0, 0.01, DuplexMode::HalfDuplex));
            if (close_rel(a.rate, b.rate, 1e-9) && a.tau_at_bound && b.tau_at_bound)
                coincide_from = static_cast<std::size_t>(i);
            else
                break;
        }
        chk.require(coincide_from < 13, "no tau0-bound coincidence regime found");
    });

    // 7. quadrature vs monte carlo
    run_criterion(7, "oracle equivalence on 20 rayleigh points", 120.0, [](Check& chk) {
        const double cs[] = {1.0, 16.0, 31.92, 160.0};
        const double ss[] = {-0.1, -0.05, -0.01, 0.02, 0.05};
        std::uint64_t seed = 777;
        for (double c : cs) {
            for (double s : ss) {
                const LinkConfig link{FadingModel{RayleighFading{c}}, 1.0};
                const double quad = exp_moment(link, kBlock, s);
                const double mc = mc_exp_moment(c, s * 200.0 / kLn2, 10000000, seed++);
                std::ostringstream tag;
                tag << "c=" << c << " s=" << s;
                chk.require(std::abs(mc - quad) <= 1e-3 * quad,
                            tag.str() + ": monte carlo disagrees with quadrature");
            }
        }
    });

    // 8. point-mass analytic identities
    run_criterion(8, "point-mass closed forms", 1.0, [](Check& chk) {
        SystemConfig cfg;
        cfg.link1 = {FadingModel{PointMassFading{1.0}}, 1.0}; // 200 bits/block
        cfg.link2 = {FadingModel{PointMassFading{3.0}}, 1.0}; // 400 bits/block
        cfg.block = kBlock;
        cfg.theta1 = 0.02;
        cfg.theta2 = 0.01;
        const double c1 = 200.0, c2 = 400.0;
        auto near = [&](double a, double b, const std::string& what) {
            chk.require(std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(b)), what);
        };
        near(lambda_sr(cfg, 0.03), 0.03 * c1, "lambda_sr");
        near(lambda_rd(cfg, -0.01), -0.01 * c2, "lambda_rd");
        near(g_rate(cfg, 0.005), c1, "g");
        near(h_rate(cfg, 0.02, 0.01), c2, "h first branch");
        near(h_rate(cfg, 0.01, 0.02), (0.02 * c2 - 0.01 * c1) / 0.01, "h second branch");
        near(upper_bound(cfg), std::min(c1, c2), "upper bound");
        const auto res = effective_capacity_full_duplex(cfg);
        near(res.rate, c1, "effective capacity (case I)");
        cfg.theta1 = 0.005;
        cfg.theta2 = 0.02;
        const auto res2 = effective_capacity_full_duplex(cfg);
        near(res2.rate, c1, "effective capacity (support degenerate)");
        chk.require(res2.case_tag == CaseTag::FD_SupportDegenerate, "unexpected case tag");
    });

    // 9. simulation cross-validation at desk scale
    run_criterion(9, "tandem-queue validation of the analytic rate", 900.0, [](Check& chk) {
        SimBudget budget;
        budget.num_blocks = 10000000;
        budget.seeds = 5;
        budget.base_seed = 42;
        budget.epsilon_est = 0.15;
        budget.pass_fraction = 0.8; // 4 of 5 seeds

        const auto fd_cfg = geometry_config(0.5, 10.0, 0.001);
        const auto fd_cap = effective_capacity(fd_cfg);
        const auto fd_report = validate_rate(fd_cfg, fd_cap, 0.1, budget);
        chk.require(fd_report.low_pass_count >= 4,
                    "full-duplex: exponents at 0.9*rate met in only " +
                        std::to_string(fd_report.low_pass_count) + "/5 seeds");
        chk.require(fd_report.high_pass_count >= 4,
                    "full-duplex: violation at 1.1*rate seen in only " +
                        std::to_string(fd_report.high_pass_count) + "/5 seeds");

        const auto hd_cfg = geometry_config(0.5, 10.0, 0.001, DuplexMode::HalfDuplex);
        const auto hd_cap = effective_capacity(hd_cfg);
        const auto hd_report = validate_rate(hd_cfg, hd_cap, 0.1, budget);
        chk.require(hd_report.low_pass_count >= 4,
                    "half-duplex: exponents at 0.9*rate met in only " +
                        std::to_string(hd_report.low_pass_count) + "/5 seeds");
        chk.require(hd_report.high_pass_count >= 4,
                    "half-duplex: violation at 1.1*rate seen in only " +
                        std::to_string(hd_report.high_pass_count) + "/5 seeds");
    });

    // 10. increasing-h regime
    run_criterion(10, "increasing h and positive growth factor in the reversed-bottleneck regime", 5.0,
                  [](Check& chk) {
        SystemConfig cfg;
        cfg.link1 = {FadingModel{DiscreteFading{{0.5, 1.5}, {0.5, 0.5}}}, 1.0};
        cfg.link2 = {FadingModel{RayleighFading{16.0}}, 1.0};
        cfg.block = kBlock;
        cfg.theta1 = 0.01;
        cfg.theta2 = 0.5;
        chk.require(g_rate(cfg, cfg.theta2) > h_rate(cfg, cfg.theta2, cfg.theta2),
                    "hypothesis g(theta2) > h(theta2, theta2) does not hold");
        double prev = -1e300;
        for (int i = 0; i <= 64; ++i) {
            const double tt = cfg.theta1 + (cfg.theta2 - cfg.theta1) * i / 64.0;
            const double h = h_rate(cfg, tt, cfg.theta2);
            chk.require(h > prev, "h not strictly increasing");
            chk.require(h_growth_factor(cfg, tt) > 0.0, "growth factor not positive");
            prev = h;
        }
    });

    std::printf("%d of 10 criteria passed\n", 10 - g_failures);
    return g_failures;
}
