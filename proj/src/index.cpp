#include "perp/index.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace perp {

std::optional<Price> depth_protected_mid(const OrderBookState& book, int band_bps) {
    auto mid = book.mid();
    if (!mid) return std::nullopt;
    const double band = static_cast<double>(band_bps) / 10000.0;

    double num = 0.0, den = 0.0;
    double bid_in = 0.0, ask_in = 0.0;
    for (const auto& [p, s] : book.bids) {
        if (p < *mid - band) break;
        num += p * s;
        den += s;
        bid_in += s;
    }
    for (const auto& [p, s] : book.asks) {
        if (p > *mid + band) break;
        num += p * s;
        den += s;
        ask_in += s;
    }
    if (bid_in <= 0.0 || ask_in <= 0.0) return std::nullopt;
    return num / den;
}

Price lwm(const std::vector<Price>& values, const std::vector<double>& weights) {
    if (values.empty() || values.size() != weights.size())
        throw Error(Error::Kind::no_components, "lwm requires matching non-empty values/weights");

    std::vector<size_t> order(values.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](size_t a, size_t b) { return values[a] < values[b]; });

    double total = 0.0;
    for (double w : weights) {
        if (w < 0.0) throw Error(Error::Kind::bad_weights, "negative lwm weight");
        total += w;
    }
    if (total <= 0.0) {
        // all-zero weights degrade to the unweighted median
        double each = 1.0;
        total = each * static_cast<double>(values.size());
        double cum = 0.0;
        for (size_t i : order) {
            cum += each;
            if (cum >= 0.5 * total) return values[i];
        }
    }
    double cum = 0.0;
    for (size_t i : order) {
        cum += weights[i];
        if (cum >= 0.5 * total) return values[i];
    }
    return values[order.back()];
}

IndexComponents index_components(const OrderBookState& book, const std::vector<TradeObs>& trades,
                                 const IndexParams& p) {
    IndexComponents c;
    c.mid = book.mid();
    c.depth_protected_mid = depth_protected_mid(book, p.band_bps);
    c.vwap = ema_vwap(trades, p.vwap_window, p.vwap_alpha);
    c.weight = depth_within(book, p.band_bps).total();
    return c;
}

IndexValue composite_index(const IndexComponents& c, double depth, const IndexParams& p) {
    std::vector<Price> values;
    std::vector<double> weights;
    for (const auto& comp : {c.mid, c.depth_protected_mid, c.vwap}) {
        if (comp) {
            values.push_back(*comp);
            weights.push_back(c.weight);
        }
    }
    if (values.empty()) throw Error(Error::Kind::no_components, "no index components available");

    IndexValue out;
    out.components_used = static_cast<uint32_t>(values.size());
    double v = lwm(values, weights);

    const bool thin = depth < p.d_min;
    if (thin) {
        // penalty pushes the value toward 0.5; sign anchor is the mid when
        // present, otherwise the median itself
        const double anchor = c.mid ? *c.mid : v;
        const double sgn = anchor > 0.5 ? 1.0 : (anchor < 0.5 ? -1.0 : 0.0);
        v -= p.theta * sgn * p.eps_thin;
        out.thin_penalty_applied = sgn != 0.0;
    }
    out.value = std::clamp(v, 0.0, 1.0);
    return out;
}

double confidence_score(uint32_t components_used, double depth, double bid_depth, double ask_depth,
                        double d_ref, double eps) {
    if (components_used <= 1) return 0.0;
    const double depth_factor = std::min(depth / d_ref, 1.0);
    const double balance = 1.0 - std::abs(bid_depth - ask_depth) / (bid_depth + ask_depth + eps);
    return depth_factor * balance;
}

std::optional<IndexValue> composite_index_from_book(const OrderBookState& book,
                                                    const std::vector<TradeObs>& trades,
                                                    const IndexParams& p) {
    IndexComponents c = index_components(book, trades, p);
    if (c.present() == 0) return std::nullopt;
    DepthProfile d = depth_within(book, p.band_bps);
    IndexValue v = composite_index(c, d.total(), p);
    v.confidence = confidence_score(v.components_used, d.total(), d.bid_depth_within,
                                    d.ask_depth_within, p.d_ref, p.conf_eps);
    return v;
}

std::optional<Price> reference_direct_index(const OrderBookState& book) {
    if (auto m = book.mid()) return m;
    if (book.last_trade) return book.last_trade->price;
    return std::nullopt;
}

}  // namespace perp
