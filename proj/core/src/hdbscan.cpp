#include "retsyn/hdbscan.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>
#include <stdexcept>

namespace retsyn {

namespace {

constexpr double kMinDistance = 1e-12;  // keeps lambda finite for coincident points

struct DendroNode {
    int left = -1;
    int right = -1;
    double dist = 0.0;
    int size = 0;
};

double euclidean(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    std::size_t n = std::min(a.size(), b.size());
    for (std::size_t i = 0; i < n; ++i) {
        double d = a[i] - b[i];
        s += d * d;
    }
    return std::sqrt(s);
}

struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    int find(int x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    }
    void unite(int a, int b) { parent[find(a)] = find(b); }
};

}  // namespace

HdbscanResult hdbscan(const std::vector<std::vector<double>>& points, int min_cluster_size) {
    if (min_cluster_size < 2) throw std::invalid_argument("min_cluster_size must be >= 2");
    HdbscanResult result;
    const int n = static_cast<int>(points.size());
    if (n == 0) return result;

    if (n < min_cluster_size) {
        // Too few points to cluster: single root holding everything, flagged.
        CondensedCluster root;
        root.id = 0;
        root.parent = -1;
        root.birth_lambda = 0.0;
        root.death_lambda = 0.0;
        root.size = n;
        for (int p = 0; p < n; ++p) root.fallouts.emplace_back(p, 0.0);
        result.clusters.push_back(std::move(root));
        result.selected = {0};
        result.label.assign(static_cast<std::size_t>(n), 0);
        result.degenerate_single_root = true;
        return result;
    }

    // Pairwise distances and core distances.
    std::vector<std::vector<double>> dist(n, std::vector<double>(n, 0.0));
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            double d = euclidean(points[i], points[j]);
            dist[i][j] = d;
            dist[j][i] = d;
        }
    }
    const int k = std::min(min_cluster_size, n - 1);
    std::vector<double> core(n);
    std::vector<double> row(n - 1);
    for (int i = 0; i < n; ++i) {
        int m = 0;
        for (int j = 0; j < n; ++j) {
            if (j != i) row[m++] = dist[i][j];
        }
        std::nth_element(row.begin(), row.begin() + (k - 1), row.end());
        core[i] = row[k - 1];
    }
    auto mreach = [&](int a, int b) { return std::max({core[a], core[b], dist[a][b]}); };

    // Prim MST over mutual reachability; ties broken by point index.
    struct Edge {
        int u, v;
        double w;
    };
    std::vector<Edge> edges;
    edges.reserve(n - 1);
    std::vector<char> in_tree(n, 0);
    std::vector<double> best_w(n, std::numeric_limits<double>::infinity());
    std::vector<int> best_from(n, -1);
    in_tree[0] = 1;
    for (int j = 1; j < n; ++j) {
        best_w[j] = mreach(0, j);
        best_from[j] = 0;
    }
    for (int step = 1; step < n; ++step) {
        int pick = -1;
        for (int j = 0; j < n; ++j) {
            if (in_tree[j]) continue;
            if (pick == -1 || best_w[j] < best_w[pick]) pick = j;
        }
        in_tree[pick] = 1;
        edges.push_back({best_from[pick], pick, best_w[pick]});
        for (int j = 0; j < n; ++j) {
            if (in_tree[j]) continue;
            double w = mreach(pick, j);
            if (w < best_w[j]) {
                best_w[j] = w;
                best_from[j] = pick;
            }
        }
    }
    std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
        if (a.w != b.w) return a.w < b.w;
        int amin = std::min(a.u, a.v), bmin = std::min(b.u, b.v);
        if (amin != bmin) return amin < bmin;
        return std::max(a.u, a.v) < std::max(b.u, b.v);
    });

    // Single-linkage dendrogram: leaves 0..n-1, internal nodes n..2n-2.
    std::vector<DendroNode> dendro(static_cast<std::size_t>(2 * n - 1));
    for (int i = 0; i < n; ++i) dendro[i].size = 1;
    UnionFind uf(n);
    std::vector<int> component_node(n);
    std::iota(component_node.begin(), component_node.end(), 0);
    int next_node = n;
    for (const auto& e : edges) {
        int ra = uf.find(e.u), rb = uf.find(e.v);
        int na = component_node[ra], nb = component_node[rb];
        DendroNode& node = dendro[next_node];
        node.left = std::min(na, nb);
        node.right = std::max(na, nb);
        node.dist = e.w;
        node.size = dendro[na].size + dendro[nb].size;
        uf.unite(ra, rb);
        component_node[uf.find(ra)] = next_node;
        ++next_node;
    }
    const int dendro_root = 2 * n - 2;

    auto leaves_under = [&](int node, std::vector<int>& out) {
        std::vector<int> stack{node};
        while (!stack.empty()) {
            int cur = stack.back();
            stack.pop_back();
            if (cur < n) {
                out.push_back(cur);
            } else {
                stack.push_back(dendro[cur].left);
                stack.push_back(dendro[cur].right);
            }
        }
    };
    auto lambda_of = [&](int node) { return 1.0 / std::max(dendro[node].dist, kMinDistance); };

    // Condense: clusters survive only while both split sides hold
    // min_cluster_size points; smaller sides fall out.
    result.clusters.clear();
    {
        CondensedCluster root;
        root.id = 0;
        root.parent = -1;
        root.birth_lambda = lambda_of(dendro_root);
        root.size = n;
        result.clusters.push_back(std::move(root));
    }
    std::queue<std::pair<int, int>> work;  // (dendro node, condensed id)
    work.push({dendro_root, 0});
    while (!work.empty()) {
        auto [node, cid] = work.front();
        work.pop();
        double lambda = lambda_of(node);
        int l = dendro[node].left, r = dendro[node].right;
        int sl = dendro[l].size, sr = dendro[r].size;
        if (sl >= min_cluster_size && sr >= min_cluster_size) {
            for (int child : {l, r}) {
                CondensedCluster sub;
                sub.id = static_cast<int>(result.clusters.size());
                sub.parent = cid;
                sub.birth_lambda = lambda;
                sub.size = dendro[child].size;
                result.clusters[cid].children.push_back(sub.id);
                int sub_id = sub.id;
                result.clusters.push_back(std::move(sub));
                work.push({child, sub_id});
            }
        } else {
            for (int child : {l, r}) {
                if (dendro[child].size >= min_cluster_size) {
                    work.push({child, cid});  // cluster continues through the big side
                } else {
                    std::vector<int> pts;
                    leaves_under(child, pts);
                    std::sort(pts.begin(), pts.end());
                    for (int p : pts) result.clusters[cid].fallouts.emplace_back(p, lambda);
                }
            }
        }
    }

    // Stability and death lambdas.
    for (auto& c : result.clusters) {
        double death = c.birth_lambda;
        double stab = 0.0;
        for (const auto& [p, lp] : c.fallouts) {
            (void)p;
            stab += lp - c.birth_lambda;
            death = std::max(death, lp);
        }
        for (int child : c.children) {
            const auto& ch = result.clusters[child];
            stab += (ch.birth_lambda - c.birth_lambda) * ch.size;
            death = std::max(death, ch.birth_lambda);
        }
        c.stability = stab;
        c.death_lambda = death;
    }

    // Excess-of-mass selection, root eligible (single-cluster data collapses
    // to the root instead of fragmenting).
    const int n_clusters = static_cast<int>(result.clusters.size());
    std::vector<double> subtree_stab(n_clusters, 0.0);
    std::vector<char> chosen(n_clusters, 0);
    for (int c = n_clusters - 1; c >= 0; --c) {
        const auto& cl = result.clusters[c];
        if (cl.children.empty()) {
            subtree_stab[c] = cl.stability;
            chosen[c] = 1;
            continue;
        }
        double kids = 0.0;
        for (int child : cl.children) kids += subtree_stab[child];
        if (cl.stability >= kids) {
            subtree_stab[c] = cl.stability;
            chosen[c] = 1;
        } else {
            subtree_stab[c] = kids;
            chosen[c] = 0;
        }
    }
    std::vector<int> stack{0};
    while (!stack.empty()) {
        int c = stack.back();
        stack.pop_back();
        if (chosen[c]) {
            result.selected.push_back(c);
        } else {
            for (int child : result.clusters[c].children) stack.push_back(child);
        }
    }
    std::sort(result.selected.begin(), result.selected.end());

    // Point labels.
    std::vector<char> is_selected(n_clusters, 0);
    for (int c : result.selected) is_selected[c] = 1;
    std::vector<int> departure(n, -1);
    std::vector<double> departure_lambda(n, 0.0);
    for (const auto& c : result.clusters) {
        for (const auto& [p, lp] : c.fallouts) {
            departure[p] = c.id;
            departure_lambda[p] = lp;
        }
    }
    result.label.assign(static_cast<std::size_t>(n), -1);
    for (int p = 0; p < n; ++p) {
        int c = departure[p];
        int sel = -1;
        for (int cur = c; cur != -1; cur = result.clusters[cur].parent) {
            if (is_selected[cur]) {
                sel = cur;
                break;
            }
        }
        if (sel == -1) continue;
        if (c != sel) {
            result.label[p] = sel;  // departed inside a collapsed descendant
            continue;
        }
        const auto& s = result.clusters[sel];
        if (departure_lambda[p] > s.birth_lambda || departure_lambda[p] >= s.death_lambda) {
            result.label[p] = sel;
        }
    }
    return result;
}

}  // namespace retsyn
