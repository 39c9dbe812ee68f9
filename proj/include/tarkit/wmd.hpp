#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "tarkit/embeddings.hpp"
#include "tarkit/error.hpp"

namespace tarkit {

namespace detail {

struct WmdSide {
    std::vector<std::string> tokens;  // distinct, in-vocabulary
    std::vector<double> weights;      // normalized frequencies, sum 1
};

/// Distinct in-vocabulary tokens with normalized frequency weights. When more
/// than `cap` distinct tokens are embedded, the most frequent are kept
/// (count descending, token ascending).
inline WmdSide wmd_side(const std::vector<std::string>& tokens, const Embeddings& emb,
                        size_t cap) {
    std::map<std::string, size_t> counts;
    for (const auto& t : tokens)
        if (emb.contains(t)) ++counts[t];
    std::vector<std::pair<std::string, size_t>> items(counts.begin(), counts.end());
    std::sort(items.begin(), items.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    if (items.size() > cap) items.resize(cap);

    WmdSide side;
    double total = 0;
    for (const auto& [token, count] : items) total += static_cast<double>(count);
    for (auto& [token, count] : items) {
        side.tokens.push_back(std::move(token));
        side.weights.push_back(static_cast<double>(count) / total);
    }
    return side;
}

/// Exact minimum-cost transportation on a complete bipartite graph via
/// successive shortest augmenting paths with node potentials.
inline double solve_transport(const std::vector<double>& supply,
                              const std::vector<double>& demand,
                              const std::vector<std::vector<double>>& cost) {
    const size_t n = supply.size(), m = demand.size();
    const size_t total_nodes = n + m;  // 0..n-1 supply, n..n+m-1 demand
    constexpr double kEps = 1e-13;
    const double inf = std::numeric_limits<double>::infinity();

    std::vector<double> residual_supply = supply;
    std::vector<double> residual_demand = demand;
    std::vector<std::vector<double>> flow(n, std::vector<double>(m, 0.0));
    std::vector<double> potential(total_nodes, 0.0);

    double remaining = 0;
    for (double s : supply) remaining += s;

    std::vector<double> dist(total_nodes);
    std::vector<int> parent(total_nodes);
    std::vector<char> settled(total_nodes);

    size_t guard = 4 * n * m + 16;
    while (remaining > kEps) {
        if (guard-- == 0) fail("transport solver failed to converge");

        // Multi-source Dijkstra over reduced costs from all unsaturated
        // supply nodes. Dense graph, so linear scans beat a heap here.
        std::fill(dist.begin(), dist.end(), inf);
        std::fill(parent.begin(), parent.end(), -1);
        std::fill(settled.begin(), settled.end(), 0);
        for (size_t i = 0; i < n; ++i)
            if (residual_supply[i] > kEps) dist[i] = 0;

        for (size_t iter = 0; iter < total_nodes; ++iter) {
            size_t u = total_nodes;
            double best = inf;
            for (size_t x = 0; x < total_nodes; ++x)
                if (!settled[x] && dist[x] < best) {
                    best = dist[x];
                    u = x;
                }
            if (u == total_nodes) break;
            settled[u] = 1;
            if (u < n) {
                for (size_t j = 0; j < m; ++j) {
                    double rc = cost[u][j] + potential[u] - potential[n + j];
                    if (rc < 0) rc = 0;  // clamp FP noise on tight edges
                    if (dist[u] + rc < dist[n + j]) {
                        dist[n + j] = dist[u] + rc;
                        parent[n + j] = static_cast<int>(u);
                    }
                }
            } else {
                size_t j = u - n;
                for (size_t i = 0; i < n; ++i) {
                    if (flow[i][j] <= kEps) continue;
                    double rc = -cost[i][j] + potential[u] - potential[i];
                    if (rc < 0) rc = 0;
                    if (dist[u] + rc < dist[i]) {
                        dist[i] = dist[u] + rc;
                        parent[i] = static_cast<int>(u);
                    }
                }
            }
        }

        size_t target = total_nodes;
        double best = inf;
        for (size_t j = 0; j < m; ++j)
            if (residual_demand[j] > kEps && dist[n + j] < best) {
                best = dist[n + j];
                target = n + j;
            }
        if (target == total_nodes) fail("transport solver: demand unreachable");

        for (size_t x = 0; x < total_nodes; ++x)
            potential[x] += std::min(dist[x], dist[target]);

        // Bottleneck along the augmenting path.
        double delta = residual_demand[target - n];
        for (size_t x = target; parent[x] != -1; x = static_cast<size_t>(parent[x])) {
            size_t p = static_cast<size_t>(parent[x]);
            if (x >= n)
                continue;  // forward edge p→x has infinite capacity
            else
                delta = std::min(delta, flow[x][p - n]);
        }
        {
            size_t root = target;
            while (parent[root] != -1) root = static_cast<size_t>(parent[root]);
            delta = std::min(delta, residual_supply[root]);

            for (size_t x = target; parent[x] != -1; x = static_cast<size_t>(parent[x])) {
                size_t p = static_cast<size_t>(parent[x]);
                if (x >= n)
                    flow[p][x - n] += delta;
                else
                    flow[x][p - n] -= delta;
            }
            residual_supply[root] -= delta;
            residual_demand[target - n] -= delta;
            remaining -= delta;
        }
    }

    double total_cost = 0;
    for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j < m; ++j) total_cost += flow[i][j] * cost[i][j];
    return total_cost;
}

}  // namespace detail

inline double euclidean_distance(std::span<const double> a, std::span<const double> b) {
    double s = 0;
    for (size_t i = 0; i < a.size(); ++i) {
        double d = a[i] - b[i];
        s += d * d;
    }
    return std::sqrt(s);
}

struct WmdConfig {
    size_t max_tokens_per_side = 200;
};

/// Word Mover's Distance: exact minimum-cost transport between the two token
/// frequency distributions under Euclidean ground cost. Tokens without
/// embeddings are dropped; a side losing all tokens is an error.
inline double word_movers_distance(const std::vector<std::string>& tokens_a,
                                   const std::vector<std::string>& tokens_b,
                                   const Embeddings& emb, const WmdConfig& config = {}) {
    detail::WmdSide a = detail::wmd_side(tokens_a, emb, config.max_tokens_per_side);
    detail::WmdSide b = detail::wmd_side(tokens_b, emb, config.max_tokens_per_side);
    if (a.tokens.empty() || b.tokens.empty())
        fail("word movers distance undefined: a side has no embedded tokens");

    std::vector<std::vector<double>> cost(a.tokens.size(),
                                          std::vector<double>(b.tokens.size(), 0.0));
    for (size_t i = 0; i < a.tokens.size(); ++i) {
        auto va = emb.vector(a.tokens[i]);
        for (size_t j = 0; j < b.tokens.size(); ++j)
            cost[i][j] = euclidean_distance(va, emb.vector(b.tokens[j]));
    }
    return detail::solve_transport(a.weights, b.weights, cost);
}

}  // namespace tarkit
