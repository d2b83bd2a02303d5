#pragma once

#include <optional>
#include <vector>

#include "perp/book.hpp"
#include "perp/estimators.hpp"
#include "perp/types.hpp"

namespace perp {

struct IndexParams {
    int band_bps = 200;        // component and weight depth window
    double theta = 1.0;        // thinness penalty gate
    double eps_thin = 0.01;    // penalty magnitude
    double d_min = 100.0;      // depth below which the penalty fires
    double d_ref = 1000.0;     // confidence depth normalizer
    double conf_eps = 1e-12;
    size_t vwap_window = 200;
    double vwap_alpha = 0.005;
};

struct IndexComponents {
    std::optional<Price> mid;
    std::optional<Price> depth_protected_mid;
    std::optional<Price> vwap;
    // depth-within-band at computation time, shared by all three components
    // (they are computed at the same instant here)
    double weight = 0.0;

    size_t present() const {
        return (mid ? 1u : 0u) + (depth_protected_mid ? 1u : 0u) + (vwap ? 1u : 0u);
    }
};

struct IndexValue {
    Price value = 0.0;
    double confidence = 0.0;
    bool thin_penalty_applied = false;
    uint32_t components_used = 0;
};

// Volume-weighted midpoint over quotes within +/- band of the simple mid;
// missing when either side has nothing inside the band.
std::optional<Price> depth_protected_mid(const OrderBookState& book, int band_bps = 200);

// Liquidity-weighted median: sort by value, return the first value whose
// cumulative weight reaches half the total.  All-zero weights degrade to the
// unweighted median.
Price lwm(const std::vector<Price>& values, const std::vector<double>& weights);

// Assemble components from a book and trailing trades.
IndexComponents index_components(const OrderBookState& book, const std::vector<TradeObs>& trades,
                                 const IndexParams& p = {});

// Composite value with the thinness penalty; throws no_components when every
// component is missing.
IndexValue composite_index(const IndexComponents& c, double depth, const IndexParams& p = {});

double confidence_score(uint32_t components_used, double depth, double bid_depth, double ask_depth,
                        double d_ref = 1000.0, double eps = 1e-12);

// Convenience: full computation from book + trades.
std::optional<IndexValue> composite_index_from_book(const OrderBookState& book,
                                                    const std::vector<TradeObs>& trades,
                                                    const IndexParams& p = {});

// Reference-engine index: simple mid when both sides quote, else the last
// trade price, else missing.
std::optional<Price> reference_direct_index(const OrderBookState& book);

}  // namespace perp
