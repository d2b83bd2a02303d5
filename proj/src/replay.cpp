#include "perp/replay.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <map>
#include <set>

#include "perp/book.hpp"
#include "perp/rng.hpp"

namespace perp {

namespace {

using nlohmann::json;

constexpr double near_zero = 1e-9;

const char* side_str(PositionSide s) { return s == PositionSide::long_ ? "long" : "short"; }

PositionSide side_from(const std::string& s) {
    return s == "short" ? PositionSide::short_ : PositionSide::long_;
}

EngineId engine_from(const std::string& s) {
    if (s == "E0") return EngineId::e0;
    if (s == "E1") return EngineId::e1;
    if (s == "E2") return EngineId::e2;
    return EngineId::custom;
}

MechanicId mechanic_from(const std::string& s) {
    if (s == "R0") return MechanicId::R0;
    if (s == "R1") return MechanicId::R1;
    if (s == "R2") return MechanicId::R2;
    return MechanicId::R3;
}

// Relative change (a - b) / b.  A ~zero base with a matching numerator reads
// as "no change"; a ~zero base with a real numerator reads as unbounded, which
// fails every reduction floor rather than passing on a 0/0 artifact.
double rel_delta(double a, double b) {
    if (std::abs(b) < near_zero)
        return std::abs(a - b) < near_zero ? 0.0 : std::numeric_limits<double>::infinity();
    return (a - b) / b;
}

json finite_or_tag(double v) {
    if (std::isfinite(v)) return v;
    return v > 0 ? "inf" : "-inf";
}

// index = p * (n - 1), truncated; matches the lower-median convention at 0.5
double pct(std::vector<double>& v, double p) {
    std::sort(v.begin(), v.end());
    return v[static_cast<size_t>(p * static_cast<double>(v.size() - 1))];
}

double mean(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

// Executes per_market over todo in guard-checked blocks.  Parallelism lives
// inside one block; the guard is only consulted on block boundaries so an
// interrupted run is a prefix of whole blocks.
template <typename Rec, typename Fn>
bool run_blocks(const std::vector<const MarketData*>& todo, const ReplayOptions& opt,
                std::vector<Rec>& out, Fn&& per_market) {
    const size_t block = opt.block == 0 ? 1 : opt.block;
    size_t done = 0;
    while (done < todo.size()) {
        if (opt.guard.triggered()) return false;
        const size_t hi = std::min(done + block, todo.size());
        const size_t base = out.size();
        out.resize(base + (hi - done));
        std::exception_ptr err = nullptr;
#pragma omp parallel for schedule(dynamic) if (opt.parallel)
        for (int64_t i = 0; i < static_cast<int64_t>(hi - done); ++i) {
            try {
                out[base + static_cast<size_t>(i)] = per_market(*todo[done + static_cast<size_t>(i)]);
            } catch (...) {
#pragma omp critical(perp_replay_err)
                {
                    if (!err) err = std::current_exception();
                }
            }
        }
        if (err) std::rethrow_exception(err);
        done = hi;
    }
    return true;
}

// Resume merge: prior records for markets still in the input are kept as-is,
// everything else is recomputed.  Output is sorted by market id regardless of
// worker scheduling.
template <typename Rec, typename Fn>
std::pair<std::vector<Rec>, bool> run_markets(const std::vector<const MarketData*>& markets,
                                              const std::vector<Rec>& prior,
                                              const ReplayOptions& opt, Fn&& per_market) {
    std::set<std::string> ids;
    for (const auto* m : markets) ids.insert(m->id);

    std::vector<Rec> recs;
    std::set<std::string> have;
    for (const auto& r : prior) {
        if (ids.count(r.market) && have.insert(r.market).second) recs.push_back(r);
    }

    std::vector<const MarketData*> todo;
    for (const auto* m : markets) {
        if (have.insert(m->id).second) todo.push_back(m);
    }
    std::sort(todo.begin(), todo.end(),
              [](const MarketData* a, const MarketData* b) { return a->id < b->id; });

    const bool completed = run_blocks(todo, opt, recs, per_market);
    std::sort(recs.begin(), recs.end(), [](const Rec& a, const Rec& b) { return a.market < b.market; });
    return {std::move(recs), completed};
}

std::vector<const MarketData*> all_of(const std::vector<MarketData>& markets) {
    std::vector<const MarketData*> out;
    out.reserve(markets.size());
    for (const auto& m : markets) out.push_back(&m);
    return out;
}

std::vector<const MarketData*> resolved_of(const std::vector<MarketData>& markets) {
    std::vector<const MarketData*> out;
    for (const auto& m : markets)
        if (m.resolution) out.push_back(&m);
    return out;
}

// Runs one cell, folding "no usable entry quote" into entered=false; anything
// else is a real fault and propagates.
std::optional<PositionOutcome> try_cell(const EngineConfig& engine, const MarketData& market,
                                        const PositionSpec& spec) {
    try {
        return simulate_position(engine, market, spec);
    } catch (const Error& e) {
        if (e.kind() == Error::Kind::no_entry_quote) return std::nullopt;
        throw;
    }
}

}  // namespace

bool StopGuard::triggered() const {
    if (max_wall_s_ > 0.0) {
        const double elapsed =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
        if (elapsed >= max_wall_s_) return true;
    }
    return !stop_file_.empty() && std::filesystem::exists(stop_file_);
}

void validate_grid(const GridSpec& grid) {
    if (grid.sides.empty() || grid.leverages.empty() || grid.notionals.empty() ||
        grid.entry_offsets_hours.empty())
        throw Error(Error::Kind::bad_config, "grid spec has an empty axis");
}

// -------- E2a

E2aRun run_e2a(const std::vector<MarketData>& markets, const std::vector<EngineConfig>& engines,
               const std::vector<double>& leverages, const ReplayOptions& opt,
               const std::vector<E2aMarketRecord>& prior) {
    auto per_market = [&](const MarketData& m) {
        E2aMarketRecord rec;
        rec.market = m.id;
        for (const auto& eng : engines) {
            for (double lev : leverages) {
                for (PositionSide side : {PositionSide::long_, PositionSide::short_}) {
                    E2aCell c;
                    c.engine = eng.id;
                    c.leverage = lev;
                    c.side = side;
                    // unit probe: the breach indicator should reflect the
                    // engine's response to the path, not position sizing,
                    // which gets its own grid in the e2b experiment
                    PositionSpec spec;
                    spec.side = side;
                    spec.leverage = lev;
                    spec.notional = 1.0;
                    spec.margin_basis = MarginBasis::entry_value;
                    if (auto out = try_cell(eng, m, spec)) {
                        c.entered = true;
                        c.breached = out->liquidation_ts.has_value();
                    }
                    rec.cells.push_back(c);
                }
            }
        }
        return rec;
    };
    auto [recs, completed] = run_markets(all_of(markets), prior, opt, per_market);
    return {std::move(recs), completed};
}

double e2a_liq_rate(const E2aRun& run, EngineId engine, double leverage) {
    uint64_t entered = 0, breached = 0;
    for (const auto& rec : run.records) {
        for (const auto& c : rec.cells) {
            if (c.engine != engine || c.leverage != leverage || !c.entered) continue;
            ++entered;
            if (c.breached) ++breached;
        }
    }
    if (entered == 0)
        throw Error(Error::Kind::missing_metric,
                    std::string("no entered cells for ") + to_string(engine) + " at the requested leverage");
    return static_cast<double>(breached) / static_cast<double>(entered);
}

json e2a_table(const E2aRun& run) {
    struct Agg {
        uint64_t entered = 0;
        uint64_t breached = 0;
    };
    std::map<std::pair<EngineId, double>, Agg> agg;
    for (const auto& rec : run.records) {
        for (const auto& c : rec.cells) {
            if (!c.entered) continue;
            auto& a = agg[{c.engine, c.leverage}];
            ++a.entered;
            if (c.breached) ++a.breached;
        }
    }
    json rows = json::array();
    for (const auto& [key, a] : agg) {
        const double liq = static_cast<double>(a.breached) / static_cast<double>(a.entered);
        rows.push_back({{"engine", to_string(key.first)},
                        {"leverage", key.second},
                        {"entered", a.entered},
                        {"breached", a.breached},
                        {"liq_rate", liq},
                        {"survival", 1.0 - liq}});
    }
    return json{{"experiment", "e2a"}, {"completed", run.completed}, {"rows", rows}};
}

json to_json(const E2aRun& run) {
    json recs = json::array();
    for (const auto& r : run.records) {
        json cells = json::array();
        for (const auto& c : r.cells)
            cells.push_back({{"engine", to_string(c.engine)},
                             {"leverage", c.leverage},
                             {"side", side_str(c.side)},
                             {"entered", c.entered},
                             {"breached", c.breached}});
        recs.push_back({{"market", r.market}, {"cells", std::move(cells)}});
    }
    return json{{"experiment", "e2a"}, {"completed", run.completed}, {"records", std::move(recs)}};
}

E2aRun e2a_from_json(const json& j) {
    E2aRun run;
    run.completed = j.at("completed").get<bool>();
    for (const auto& rj : j.at("records")) {
        E2aMarketRecord r;
        r.market = rj.at("market").get<std::string>();
        for (const auto& cj : rj.at("cells")) {
            E2aCell c;
            c.engine = engine_from(cj.at("engine").get<std::string>());
            c.leverage = cj.at("leverage").get<double>();
            c.side = side_from(cj.at("side").get<std::string>());
            c.entered = cj.at("entered").get<bool>();
            c.breached = cj.at("breached").get<bool>();
            r.cells.push_back(c);
        }
        run.records.push_back(std::move(r));
    }
    return run;
}

// -------- E2b

E2bRun run_e2b(const std::vector<MarketData>& markets, const std::vector<EngineConfig>& engines,
               const GridSpec& grid, const ReplayOptions& opt,
               const std::vector<E2bMarketRecord>& prior) {
    validate_grid(grid);
    auto resolved = resolved_of(markets);
    if (resolved.empty())
        throw Error(Error::Kind::no_resolved_markets, "the e2b grid needs resolved markets");

    auto per_market = [&](const MarketData& m) {
        const Ts tau = m.resolution->resolution_ts;
        E2bMarketRecord rec;
        rec.market = m.id;
        rec.cls = m.cls;
        for (const auto& eng : engines) {
            for (PositionSide side : grid.sides) {
                for (double lev : grid.leverages) {
                    for (double notional : grid.notionals) {
                        for (double off : grid.entry_offsets_hours) {
                            E2bCell c;
                            c.engine = eng.id;
                            c.leverage = lev;
                            c.side = side;
                            c.notional = notional;
                            c.offset_hours = off;
                            PositionSpec spec;
                            spec.side = side;
                            spec.leverage = lev;
                            spec.notional = notional;
                            spec.entry_ts = tau - static_cast<Ts>(off * ms_per_hour);
                            spec.margin_basis = MarginBasis::entry_value;
                            if (auto out = try_cell(eng, m, spec)) {
                                c.entered = true;
                                c.entry_value = notional * out->entry_price;
                                c.bad_debt = out->bad_debt;
                                c.final_pnl = out->final_pnl;
                            }
                            rec.cells.push_back(c);
                        }
                    }
                }
            }
        }
        return rec;
    };
    auto [recs, completed] = run_markets(resolved, prior, opt, per_market);

    E2bRun run;
    run.records = std::move(recs);
    run.completed = completed;
    for (const auto& eng : engines)
        run.phi_by_engine.emplace_back(eng.id, eng.params.liquidation.phi_fund);
    return run;
}

namespace {

double e2b_total_drawdown(const E2bRun& run, EngineId engine) {
    double dd = 0.0;
    bool seen = false;
    for (const auto& rec : run.records) {
        for (const auto& c : rec.cells) {
            if (c.engine != engine || !c.entered) continue;
            seen = true;
            dd += c.bad_debt;
        }
    }
    if (!seen)
        throw Error(Error::Kind::missing_metric,
                    std::string("no entered e2b cells for ") + to_string(engine));
    return dd;
}

}  // namespace

double e2b_relative_delta(const E2bRun& run, EngineId a, EngineId b) {
    return rel_delta(e2b_total_drawdown(run, a), e2b_total_drawdown(run, b));
}

json e2b_table(const E2bRun& run) {
    struct Agg {
        double oi = 0.0;
        double drawdown = 0.0;
        std::map<MarketClass, double> by_class;
        std::vector<double> pnl;
    };
    std::map<EngineId, Agg> agg;
    for (const auto& rec : run.records) {
        for (const auto& c : rec.cells) {
            if (!c.entered) continue;
            auto& a = agg[c.engine];
            a.oi += c.entry_value;
            a.drawdown += c.bad_debt;
            a.by_class[rec.cls] += c.bad_debt;
            a.pnl.push_back(c.final_pnl);
        }
    }
    json rows = json::array();
    for (auto& [eng, a] : agg) {
        double phi = 0.0;
        for (const auto& [id, p] : run.phi_by_engine)
            if (id == eng) phi = p;
        const double fund0 = phi * a.oi;
        json by_class = json::object();
        for (const auto& [cls, dd] : a.by_class) by_class[to_string(cls)] = dd;
        rows.push_back({{"engine", to_string(eng)},
                        {"cells_entered", a.pnl.size()},
                        {"total_open_interest", a.oi},
                        {"fund_initial", fund0},
                        {"total_drawdown", a.drawdown},
                        {"fund_final", fund0 - a.drawdown},
                        {"drawdown_by_class", std::move(by_class)},
                        {"pnl_p10", pct(a.pnl, 0.10)},
                        {"pnl_p50", pct(a.pnl, 0.50)},
                        {"pnl_mean", mean(a.pnl)}});
    }
    return json{{"experiment", "e2b"}, {"completed", run.completed}, {"rows", std::move(rows)}};
}

json to_json(const E2bRun& run) {
    json phi = json::array();
    for (const auto& [id, p] : run.phi_by_engine)
        phi.push_back({{"engine", to_string(id)}, {"phi_fund", p}});
    json recs = json::array();
    for (const auto& r : run.records) {
        json cells = json::array();
        for (const auto& c : r.cells)
            cells.push_back({{"engine", to_string(c.engine)},
                             {"leverage", c.leverage},
                             {"side", side_str(c.side)},
                             {"notional", c.notional},
                             {"offset_hours", c.offset_hours},
                             {"entered", c.entered},
                             {"entry_value", c.entry_value},
                             {"bad_debt", c.bad_debt},
                             {"final_pnl", c.final_pnl}});
        recs.push_back(
            {{"market", r.market}, {"class", to_string(r.cls)}, {"cells", std::move(cells)}});
    }
    return json{{"experiment", "e2b"},
                {"completed", run.completed},
                {"phi_by_engine", std::move(phi)},
                {"records", std::move(recs)}};
}

E2bRun e2b_from_json(const json& j) {
    E2bRun run;
    run.completed = j.at("completed").get<bool>();
    for (const auto& pj : j.at("phi_by_engine"))
        run.phi_by_engine.emplace_back(engine_from(pj.at("engine").get<std::string>()),
                                       pj.at("phi_fund").get<double>());
    for (const auto& rj : j.at("records")) {
        E2bMarketRecord r;
        r.market = rj.at("market").get<std::string>();
        r.cls = market_class_from_string(rj.at("class").get<std::string>());
        for (const auto& cj : rj.at("cells")) {
            E2bCell c;
            c.engine = engine_from(cj.at("engine").get<std::string>());
            c.leverage = cj.at("leverage").get<double>();
            c.side = side_from(cj.at("side").get<std::string>());
            c.notional = cj.at("notional").get<double>();
            c.offset_hours = cj.at("offset_hours").get<double>();
            c.entered = cj.at("entered").get<bool>();
            c.entry_value = cj.at("entry_value").get<double>();
            c.bad_debt = cj.at("bad_debt").get<double>();
            c.final_pnl = cj.at("final_pnl").get<double>();
            r.cells.push_back(c);
        }
        run.records.push_back(std::move(r));
    }
    return run;
}

// -------- E2c

namespace {

struct Persona {
    PositionSide side = PositionSide::long_;
    double leverage = 1.0;
};

// One fixed persona per trader slot, independent of market count, engine
// count and worker scheduling; this is what makes reruns byte-identical.
std::vector<Persona> draw_personas(const TraderPopSpec& pop) {
    std::vector<Persona> out;
    out.reserve(pop.n_traders);
    for (size_t t = 0; t < pop.n_traders; ++t) {
        SplitMix64 g(derive_seed(pop.seed, t));
        Persona p;
        p.leverage = std::clamp(g.lognormal(pop.lev_mu, pop.lev_sigma), pop.lev_min, pop.lev_max);
        p.side = g.below(2) == 0 ? PositionSide::long_ : PositionSide::short_;
        out.push_back(p);
    }
    return out;
}

// First instant where the engine's index moved by at least entry_move over
// the trailing window.  Carry-forward lookup on the left endpoint.
std::optional<Ts> entry_trigger(const EngineConfig& eng, const MarketData& m,
                                const TraderPopSpec& pop) {
    const Ts trail_ms = static_cast<Ts>(pop.trail_hours * ms_per_hour);
    OrderBookState book;
    std::vector<TradeObs> trades;
    std::vector<std::pair<Ts, Price>> path;
    size_t j = 0;
    for (const auto& ev : m.events) {
        const Ts ts = ev.timestamp_received;
        apply_event(book, ev);
        if (ev.event_type == EventType::last_trade_price)
            trades.push_back({ts, ev.trade().price, ev.trade().size});
        auto v = compute_index(eng, book, trades);
        if (!v) continue;
        path.emplace_back(ts, *v);
        while (j + 1 < path.size() && path[j + 1].first <= ts - trail_ms) ++j;
        if (path[j].first <= ts - trail_ms && std::abs(*v - path[j].second) >= pop.entry_move)
            return ts;
    }
    return std::nullopt;
}

}  // namespace

E2cRun run_e2c(const std::vector<MarketData>& markets, const std::vector<EngineConfig>& engines,
               const TraderPopSpec& pop, const ReplayOptions& opt,
               const std::vector<E2cMarketRecord>& prior) {
    const auto personas = draw_personas(pop);

    auto per_market = [&](const MarketData& m) {
        E2cMarketRecord rec;
        rec.market = m.id;
        rec.pnl.assign(engines.size() * pop.n_traders, 0.0);
        rec.entered.assign(engines.size() * pop.n_traders, 0);
        for (size_t e = 0; e < engines.size(); ++e) {
            const auto trigger = entry_trigger(engines[e], m, pop);
            if (!trigger) continue;
            for (size_t t = 0; t < pop.n_traders; ++t) {
                PositionSpec spec;
                spec.side = personas[t].side;
                spec.leverage = personas[t].leverage;
                spec.notional = pop.notional;
                spec.entry_ts = *trigger;
                spec.margin_basis = MarginBasis::entry_value;
                spec.exit = ExitRule{pop.stop_loss_frac, pop.take_profit_frac, pop.timeout_hours};
                if (auto out = try_cell(engines[e], m, spec)) {
                    rec.pnl[e * pop.n_traders + t] = out->final_pnl;
                    rec.entered[e * pop.n_traders + t] = 1;
                }
            }
        }
        return rec;
    };
    auto [recs, completed] = run_markets(all_of(markets), prior, opt, per_market);

    E2cRun run;
    run.records = std::move(recs);
    run.completed = completed;
    run.n_traders = pop.n_traders;
    for (const auto& eng : engines) run.engine_rows.push_back(eng.id);
    return run;
}

json e2c_table(const E2cRun& run) {
    json rows = json::array();
    for (size_t e = 0; e < run.engine_rows.size(); ++e) {
        std::vector<double> pnl;
        uint64_t entered = 0;
        for (const auto& rec : run.records) {
            for (size_t t = 0; t < run.n_traders; ++t) {
                pnl.push_back(rec.pnl[e * run.n_traders + t]);
                entered += rec.entered[e * run.n_traders + t];
            }
        }
        json row = {{"engine", to_string(run.engine_rows[e])},
                    {"observations", pnl.size()},
                    {"entered", entered}};
        if (!pnl.empty()) {
            row["pnl_p10"] = pct(pnl, 0.10);
            row["pnl_p50"] = pct(pnl, 0.50);
            row["pnl_mean"] = mean(pnl);
        }
        rows.push_back(std::move(row));
    }
    return json{{"experiment", "e2c"}, {"completed", run.completed}, {"rows", std::move(rows)}};
}

// -------- E3

namespace {

EngineConfig mechanic_engine(MechanicId m, const EngineParams& params) {
    // baseline measurement wiring held fixed; only resolution-zone behavior
    // varies across the four rows
    EngineConfig cfg;
    cfg.id = EngineId::custom;
    cfg.index_source = IndexSource::reference_direct;
    cfg.margin_mode = MarginMode::static_vol;
    cfg.funding_mode = (m == MechanicId::R2 || m == MechanicId::R3) ? FundingMode::aware
                                                                    : FundingMode::naive;
    cfg.leverage_mode = m == MechanicId::R0 ? LeverageMode::constant : LeverageMode::compressed;
    cfg.mechanic = m;
    cfg.params = params;
    return cfg;
}

}  // namespace

E3Run run_e3(const std::vector<MarketData>& markets, const std::vector<MechanicId>& mechanics,
             const std::vector<double>& leverages, const EngineParams& params,
             const ReplayOptions& opt, const std::vector<E3MarketRecord>& prior) {
    std::vector<EngineConfig> engines;
    engines.reserve(mechanics.size());
    for (MechanicId m : mechanics) engines.push_back(mechanic_engine(m, params));

    auto per_market = [&](const MarketData& m) {
        const Ts tau = m.resolution->resolution_ts;
        const Ts final_window_start = tau - ms_per_hour;
        E3MarketRecord rec;
        rec.market = m.id;
        for (const auto& eng : engines) {
            for (double lev : leverages) {
                for (PositionSide side : {PositionSide::long_, PositionSide::short_}) {
                    E3Cell c;
                    c.mechanic = eng.mechanic;
                    c.leverage = lev;
                    c.side = side;
                    PositionSpec spec;
                    spec.side = side;
                    spec.leverage = lev;
                    spec.notional = 100.0;
                    spec.margin_basis = MarginBasis::unit_payout;
                    if (auto out = try_cell(eng, m, spec)) {
                        c.entered = true;
                        c.breached = out->liquidation_ts.has_value();
                        c.liquidation_ts = out->liquidation_ts;
                        c.final_window_liq = out->liquidation_ts &&
                                             *out->liquidation_ts >= final_window_start &&
                                             *out->liquidation_ts < tau;
                        c.bad_debt = out->bad_debt;
                        c.final_pnl = out->final_pnl;
                    }
                    rec.cells.push_back(c);
                }
            }
        }
        return rec;
    };
    auto [recs, completed] = run_markets(resolved_of(markets), prior, opt, per_market);
    return {std::move(recs), completed};
}

namespace {

struct E3Agg {
    uint64_t entered = 0;
    uint64_t final_window = 0;
    uint64_t bad_debt_events = 0;
    double pnl_sum = 0.0;
};

E3Agg e3_pooled(const E3Run& run, MechanicId m) {
    E3Agg a;
    for (const auto& rec : run.records) {
        for (const auto& c : rec.cells) {
            if (c.mechanic != m || !c.entered) continue;
            ++a.entered;
            if (c.final_window_liq) ++a.final_window;
            if (c.bad_debt > 1e-12) ++a.bad_debt_events;
            a.pnl_sum += c.final_pnl;
        }
    }
    if (a.entered == 0)
        throw Error(Error::Kind::missing_metric,
                    std::string("no entered e3 cells for ") + to_string(m));
    return a;
}

}  // namespace

double e3_final_hour_liq_rate(const E3Run& run, MechanicId m) {
    const E3Agg a = e3_pooled(run, m);
    return static_cast<double>(a.final_window) / static_cast<double>(a.entered);
}

double e3_bad_debt_freq(const E3Run& run, MechanicId m) {
    const E3Agg a = e3_pooled(run, m);
    return static_cast<double>(a.bad_debt_events) / static_cast<double>(a.entered);
}

double e3_mean_pnl(const E3Run& run, MechanicId m) {
    const E3Agg a = e3_pooled(run, m);
    return a.pnl_sum / static_cast<double>(a.entered);
}

json e3_table(const E3Run& run) {
    struct Agg {
        uint64_t entered = 0;
        uint64_t final_window = 0;
        uint64_t bad_debt_events = 0;
        double pnl_sum = 0.0;
    };
    std::map<std::pair<MechanicId, double>, Agg> agg;
    std::set<MechanicId> mechanics;
    for (const auto& rec : run.records) {
        for (const auto& c : rec.cells) {
            if (!c.entered) continue;
            mechanics.insert(c.mechanic);
            auto& a = agg[{c.mechanic, c.leverage}];
            ++a.entered;
            if (c.final_window_liq) ++a.final_window;
            if (c.bad_debt > 1e-12) ++a.bad_debt_events;
            a.pnl_sum += c.final_pnl;
        }
    }
    json rows = json::array();
    for (const auto& [key, a] : agg) {
        const double n = static_cast<double>(a.entered);
        rows.push_back({{"mechanic", to_string(key.first)},
                        {"leverage", key.second},
                        {"entered", a.entered},
                        {"final_hour_liq_rate", static_cast<double>(a.final_window) / n},
                        {"bad_debt_freq", static_cast<double>(a.bad_debt_events) / n},
                        {"mean_pnl", a.pnl_sum / n}});
    }
    json pooled = json::array();
    for (MechanicId m : mechanics) {
        pooled.push_back({{"mechanic", to_string(m)},
                          {"final_hour_liq_rate", e3_final_hour_liq_rate(run, m)},
                          {"bad_debt_freq", e3_bad_debt_freq(run, m)},
                          {"mean_pnl", e3_mean_pnl(run, m)}});
    }
    return json{{"experiment", "e3"},
                {"completed", run.completed},
                {"rows", std::move(rows)},
                {"pooled", std::move(pooled)}};
}

json to_json(const E3Run& run) {
    json recs = json::array();
    for (const auto& r : run.records) {
        json cells = json::array();
        for (const auto& c : r.cells) {
            json cj = {{"mechanic", to_string(c.mechanic)},
                       {"leverage", c.leverage},
                       {"side", side_str(c.side)},
                       {"entered", c.entered},
                       {"breached", c.breached},
                       {"final_window_liq", c.final_window_liq},
                       {"bad_debt", c.bad_debt},
                       {"final_pnl", c.final_pnl}};
            cj["liquidation_ts"] = c.liquidation_ts ? json(*c.liquidation_ts) : json(nullptr);
            cells.push_back(std::move(cj));
        }
        recs.push_back({{"market", r.market}, {"cells", std::move(cells)}});
    }
    return json{{"experiment", "e3"}, {"completed", run.completed}, {"records", std::move(recs)}};
}

E3Run e3_from_json(const json& j) {
    E3Run run;
    run.completed = j.at("completed").get<bool>();
    for (const auto& rj : j.at("records")) {
        E3MarketRecord r;
        r.market = rj.at("market").get<std::string>();
        for (const auto& cj : rj.at("cells")) {
            E3Cell c;
            c.mechanic = mechanic_from(cj.at("mechanic").get<std::string>());
            c.leverage = cj.at("leverage").get<double>();
            c.side = side_from(cj.at("side").get<std::string>());
            c.entered = cj.at("entered").get<bool>();
            c.breached = cj.at("breached").get<bool>();
            c.final_window_liq = cj.at("final_window_liq").get<bool>();
            c.bad_debt = cj.at("bad_debt").get<double>();
            c.final_pnl = cj.at("final_pnl").get<double>();
            if (!cj.at("liquidation_ts").is_null())
                c.liquidation_ts = cj.at("liquidation_ts").get<Ts>();
            r.cells.push_back(c);
        }
        run.records.push_back(std::move(r));
    }
    return run;
}

// -------- Floors

FloorReport evaluate_floors(const E2aRun& e2a, const E2bRun& e2b, const E3Run& e3) {
    FloorReport r;
    auto add = [&](const char* name, double floor, double realized) {
        r.lines.push_back({name, floor, realized, realized <= floor});
    };

    add("e2a_liq_rate_delta_l5", -0.30,
        rel_delta(e2a_liq_rate(e2a, EngineId::e2, 5.0), e2a_liq_rate(e2a, EngineId::e0, 5.0)));
    add("e2b_drawdown_delta", -0.50, e2b_relative_delta(e2b, EngineId::e2, EngineId::e0));
    add("e3_final_hour_liq_delta", -0.50,
        rel_delta(e3_final_hour_liq_rate(e3, MechanicId::R3),
                  e3_final_hour_liq_rate(e3, MechanicId::R0)));
    add("e3_bad_debt_delta", -0.75,
        rel_delta(e3_bad_debt_freq(e3, MechanicId::R3), e3_bad_debt_freq(e3, MechanicId::R0)));

    // positive = traders end worse off under the halt protocol
    const double w0 = e3_mean_pnl(e3, MechanicId::R0);
    const double w3 = e3_mean_pnl(e3, MechanicId::R3);
    double degradation;
    if (std::abs(w0) < near_zero)
        degradation = std::abs(w3 - w0) < near_zero ? 0.0 : std::numeric_limits<double>::infinity();
    else
        degradation = (w0 - w3) / std::abs(w0);
    add("e3_welfare_degradation", 0.30, degradation);

    r.all_pass = std::all_of(r.lines.begin(), r.lines.end(),
                             [](const FloorLine& l) { return l.pass; });
    return r;
}

json to_json(const FloorReport& r) {
    json lines = json::array();
    for (const auto& l : r.lines)
        lines.push_back({{"name", l.name},
                         {"floor", l.floor},
                         {"realized", finite_or_tag(l.realized)},
                         {"pass", l.pass}});
    return json{{"floors", std::move(lines)}, {"all_pass", r.all_pass}};
}

// -------- Sensitivity sweep

const std::vector<SweepAxis>& sweep_axes() {
    static const std::vector<SweepAxis> axes = {
        {"c", 0.0005, 0.002},         {"beta_f", 0.0, 1.0},       {"delta_b", 0.05, 0.20},
        {"m_sigma", 2.0, 4.0},        {"m_jump", 0.3, 0.8},       {"mu", 0.25, 0.75},
        {"eta_trnch", 0.1, 0.5},      {"delta_trnch_s", 10.0, 300.0},
        {"phi_fund", 0.01, 0.10},
    };
    return axes;
}

EngineParams apply_axis(const EngineParams& base, const std::string& axis, double value) {
    const SweepAxis* found = nullptr;
    for (const auto& a : sweep_axes())
        if (a.name == axis) found = &a;
    if (!found) throw Error(Error::Kind::unknown_axis, "no registered sweep axis named " + axis);
    if (value < found->lo || value > found->hi)
        throw Error(Error::Kind::out_of_range, axis + " outside its declared sweep range");

    EngineParams p = base;
    if (axis == "c")
        p.funding.c = value;
    else if (axis == "beta_f")
        p.funding.beta_f = value;
    else if (axis == "delta_b")
        p.funding.delta_b = value;
    else if (axis == "m_sigma")
        p.margin.m_sigma = value;
    else if (axis == "m_jump")
        p.margin.m_jump = value;
    else if (axis == "mu")
        p.margin.mu = value;
    else if (axis == "eta_trnch")
        p.liquidation.eta_trnch = value;
    else if (axis == "delta_trnch_s")
        p.liquidation.delta_trnch_s = value;
    else if (axis == "phi_fund")
        p.liquidation.phi_fund = value;
    return p;
}

std::vector<SweepPoint> sensitivity_sweep(const std::vector<MarketData>& markets,
                                          const std::string& axis,
                                          const std::vector<double>& values,
                                          const EngineParams& base, const ReplayOptions& opt) {
    if (values.empty()) throw Error(Error::Kind::out_of_range, "empty sweep grid");
    std::vector<SweepPoint> out;
    out.reserve(values.size());
    for (double v : values) {
        const EngineParams params = apply_axis(base, axis, v);
        std::vector<EngineConfig> engines = {build_engine(EngineId::e0, params),
                                             build_engine(EngineId::e1, params),
                                             build_engine(EngineId::e2, params)};
        SweepPoint point;
        point.value = v;
        point.metrics["e2a"] = e2a_table(run_e2a(markets, engines, {1, 2, 3, 5, 10}, opt));
        point.metrics["e2b"] = e2b_table(run_e2b(markets, engines, {}, opt));
        point.metrics["e3"] = e3_table(run_e3(markets,
                                              {MechanicId::R0, MechanicId::R1, MechanicId::R2,
                                               MechanicId::R3},
                                              {2, 3, 5, 10}, params, opt));
        out.push_back(std::move(point));
    }
    return out;
}

}  // namespace perp
