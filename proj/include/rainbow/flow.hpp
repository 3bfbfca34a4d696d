#pragma once

#include <algorithm>
#include <limits>
#include <queue>
#include <vector>

namespace rainbow {

// Dinic max-flow on small integer-capacity networks. Used for exact
// degree-constrained subgraph extraction; the instances here are tiny
// (hundreds of nodes), so no scaling tricks are needed.
class MaxFlow {
public:
    explicit MaxFlow(int n) : head_(n, -1) {}

    int add_edge(int from, int to, int capacity) {
        int id = static_cast<int>(to_.size());
        to_.push_back(to);
        cap_.push_back(capacity);
        next_.push_back(head_[from]);
        head_[from] = id;
        to_.push_back(from);
        cap_.push_back(0);
        next_.push_back(head_[to]);
        head_[to] = id + 1;
        return id;
    }

    int flow_on(int edge_id) const { return cap_[edge_id ^ 1]; }
    int residual(int edge_id) const { return cap_[edge_id]; }

    long long max_flow(int source, int sink) {
        source_ = source;
        sink_ = sink;
        long long total = 0;
        while (bfs()) {
            iter_ = head_;
            long long pushed;
            while ((pushed = dfs(source_, std::numeric_limits<long long>::max())) > 0)
                total += pushed;
        }
        return total;
    }

    // Vertices reachable from the source in the residual graph after max_flow
    // (the source side of a minimum cut).
    std::vector<char> min_cut_source_side() const {
        std::vector<char> seen(head_.size(), 0);
        std::queue<int> q;
        q.push(source_);
        seen[source_] = 1;
        while (!q.empty()) {
            int v = q.front();
            q.pop();
            for (int e = head_[v]; e != -1; e = next_[e]) {
                if (cap_[e] > 0 && !seen[to_[e]]) {
                    seen[to_[e]] = 1;
                    q.push(to_[e]);
                }
            }
        }
        return seen;
    }

private:
    bool bfs() {
        level_.assign(head_.size(), -1);
        std::queue<int> q;
        q.push(source_);
        level_[source_] = 0;
        while (!q.empty()) {
            int v = q.front();
            q.pop();
            for (int e = head_[v]; e != -1; e = next_[e])
                if (cap_[e] > 0 && level_[to_[e]] < 0) {
                    level_[to_[e]] = level_[v] + 1;
                    q.push(to_[e]);
                }
        }
        return level_[sink_] >= 0;
    }

    long long dfs(int v, long long limit) {
        if (v == sink_) return limit;
        for (int& e = iter_[v]; e != -1; e = next_[e]) {
            int w = to_[e];
            if (cap_[e] > 0 && level_[w] == level_[v] + 1) {
                long long pushed = dfs(w, std::min<long long>(limit, cap_[e]));
                if (pushed > 0) {
                    cap_[e] -= static_cast<int>(pushed);
                    cap_[e ^ 1] += static_cast<int>(pushed);
                    return pushed;
                }
            }
        }
        level_[v] = -1;
        return 0;
    }

    std::vector<int> head_, next_, to_, cap_, level_, iter_;
    int source_ = 0, sink_ = 0;
};

}  // namespace rainbow
