#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "perp/engine.hpp"

namespace perp {

// Cooperative stop: a watched file appearing or a wall-clock budget running
// out.  Consulted between market blocks, never inside one, so interrupted
// runs land on block boundaries and resume cleanly.
class StopGuard {
public:
    StopGuard() = default;
    StopGuard(std::string stop_file, double max_wall_min)
        : stop_file_(std::move(stop_file)), max_wall_s_(max_wall_min * 60.0) {}

    bool triggered() const;

private:
    std::string stop_file_;
    double max_wall_s_ = 0.0;
    std::chrono::steady_clock::time_point t0_ = std::chrono::steady_clock::now();
};

struct ReplayOptions {
    bool parallel = true;
    size_t block = 100;  // markets per guard check
    StopGuard guard;
};

// -------- E2a: trader-independent survivability over the leverage grid

struct E2aCell {
    EngineId engine = EngineId::e0;
    double leverage = 1.0;
    PositionSide side = PositionSide::long_;
    bool entered = false;
    bool breached = false;
};

struct E2aMarketRecord {
    std::string market;
    std::vector<E2aCell> cells;
};

struct E2aRun {
    std::vector<E2aMarketRecord> records;  // sorted by market id
    bool completed = true;
};

E2aRun run_e2a(const std::vector<MarketData>& markets, const std::vector<EngineConfig>& engines,
               const std::vector<double>& leverages = {1, 2, 3, 5, 10},
               const ReplayOptions& opt = {}, const std::vector<E2aMarketRecord>& prior = {});

// Survival fraction per engine x leverage, from entered cells.
nlohmann::json e2a_table(const E2aRun& run);
// Breach fraction for one (engine, leverage) row; throws missing_metric when
// no entered cell matches.
double e2a_liq_rate(const E2aRun& run, EngineId engine, double leverage);

nlohmann::json to_json(const E2aRun& run);
E2aRun e2a_from_json(const nlohmann::json& j);

// -------- E2b: deterministic grid with insurance-fund drawdown

struct GridSpec {
    std::vector<PositionSide> sides = {PositionSide::long_, PositionSide::short_};
    std::vector<double> leverages = {1, 2, 3, 5, 10};
    std::vector<double> notionals = {100, 1000, 10000};  // payout units per cell
    std::vector<double> entry_offsets_hours = {24, 12, 6, 1};  // before resolution
};

// Throws bad_config on an empty axis.
void validate_grid(const GridSpec& grid);

struct E2bCell {
    EngineId engine = EngineId::e0;
    double leverage = 1.0;
    PositionSide side = PositionSide::long_;
    double notional = 0.0;
    double offset_hours = 0.0;
    bool entered = false;
    double entry_value = 0.0;  // units * entry price, the cell's open interest
    double bad_debt = 0.0;
    double final_pnl = 0.0;
};

struct E2bMarketRecord {
    std::string market;
    MarketClass cls = MarketClass::other;
    std::vector<E2bCell> cells;
};

struct E2bRun {
    std::vector<E2bMarketRecord> records;
    std::vector<std::pair<EngineId, double>> phi_by_engine;  // fund sizing per engine
    bool completed = true;
};

// Resolved markets only; throws no_resolved_markets when none qualify.
E2bRun run_e2b(const std::vector<MarketData>& markets, const std::vector<EngineConfig>& engines,
               const GridSpec& grid = {}, const ReplayOptions& opt = {},
               const std::vector<E2bMarketRecord>& prior = {});

// Per engine: fund initial phi * total open interest, total drawdown (pooled
// and per class), fund final, PnL percentiles.
nlohmann::json e2b_table(const E2bRun& run);
// (drawdown_a - drawdown_b) / drawdown_b with the near-zero guard.
double e2b_relative_delta(const E2bRun& run, EngineId a, EngineId b);

nlohmann::json to_json(const E2bRun& run);
E2bRun e2b_from_json(const nlohmann::json& j);

// -------- E2c: synthetic trader population

struct TraderPopSpec {
    size_t n_traders = 100;
    double lev_mu = 0.8;  // lognormal leverage draw, clipped below
    double lev_sigma = 0.6;
    double lev_min = 1.0;
    double lev_max = 10.0;
    double notional = 100.0;
    // enter when the index moved by at least entry_move over the trailing
    // window; exit on the stop/take/timeout mix
    double entry_move = 0.05;
    double trail_hours = 1.0;
    double stop_loss_frac = 0.5;
    double take_profit_frac = 0.5;
    double timeout_hours = 24.0;
    uint64_t seed = 1;
};

struct E2cMarketRecord {
    std::string market;
    // pnl[engine_row * n_traders + trader]; never-entered traders carry 0
    std::vector<double> pnl;
    std::vector<uint8_t> entered;
};

struct E2cRun {
    std::vector<E2cMarketRecord> records;
    std::vector<EngineId> engine_rows;
    size_t n_traders = 0;
    bool completed = true;
};

E2cRun run_e2c(const std::vector<MarketData>& markets, const std::vector<EngineConfig>& engines,
               const TraderPopSpec& pop, const ReplayOptions& opt = {},
               const std::vector<E2cMarketRecord>& prior = {});

// Per engine: p10 / p50 / mean trader PnL.
nlohmann::json e2c_table(const E2cRun& run);

// -------- E3: resolution-zone mechanic comparison

struct E3Cell {
    MechanicId mechanic = MechanicId::R0;
    double leverage = 2.0;
    PositionSide side = PositionSide::long_;
    bool entered = false;
    bool breached = false;
    std::optional<Ts> liquidation_ts;
    bool final_window_liq = false;  // first breach inside [tau - 1h, tau)
    double bad_debt = 0.0;
    double final_pnl = 0.0;
};

struct E3MarketRecord {
    std::string market;
    std::vector<E3Cell> cells;
};

struct E3Run {
    std::vector<E3MarketRecord> records;
    bool completed = true;
};

// Holds index/margin/liquidation at the baseline wiring and varies only the
// resolution-zone mechanic (funding rule and compression follow the
// mechanic's constraints).  Positions margin on unit payout.
E3Run run_e3(const std::vector<MarketData>& markets,
             const std::vector<MechanicId>& mechanics = {MechanicId::R0, MechanicId::R1,
                                                         MechanicId::R2, MechanicId::R3},
             const std::vector<double>& leverages = {2, 3, 5, 10},
             const EngineParams& params = {}, const ReplayOptions& opt = {},
             const std::vector<E3MarketRecord>& prior = {});

nlohmann::json e3_table(const E3Run& run);
double e3_final_hour_liq_rate(const E3Run& run, MechanicId m);
double e3_bad_debt_freq(const E3Run& run, MechanicId m);
double e3_mean_pnl(const E3Run& run, MechanicId m);

nlohmann::json to_json(const E3Run& run);
E3Run e3_from_json(const nlohmann::json& j);

// -------- Floors

struct FloorLine {
    std::string name;
    double floor = 0.0;
    double realized = 0.0;
    bool pass = false;
};

struct FloorReport {
    std::vector<FloorLine> lines;
    bool all_pass = false;
};

// The five pre-registered materiality floors.  Relative changes use
// (a - b) / b with a near-zero guard: equal-within-1e-9 numerators map to 0,
// anything else over a ~zero base maps to +inf.  Exact ties with a floor
// pass.  Throws missing_metric when a required engine, mechanic or leverage
// row is absent.
FloorReport evaluate_floors(const E2aRun& e2a, const E2bRun& e2b, const E3Run& e3);
nlohmann::json to_json(const FloorReport& r);

// -------- Sensitivity sweep

struct SweepAxis {
    std::string name;
    double lo = 0.0;
    double hi = 0.0;
};

// The registered policy axes and their declared ranges.
const std::vector<SweepAxis>& sweep_axes();

// Copy of base with the named axis set; throws unknown_axis / out_of_range.
EngineParams apply_axis(const EngineParams& base, const std::string& axis, double value);

struct SweepPoint {
    double value = 0.0;
    nlohmann::json metrics;
};

// One headline-metric bundle (E2a, E2b, E3 tables) per grid value; empty
// grids are rejected with out_of_range.
std::vector<SweepPoint> sensitivity_sweep(const std::vector<MarketData>& markets,
                                          const std::string& axis,
                                          const std::vector<double>& values,
                                          const EngineParams& base = {},
                                          const ReplayOptions& opt = {});

}  // namespace perp
