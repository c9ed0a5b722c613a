#pragma once

#include <cstddef>
#include <vector>

namespace retsyn {

// Condensed-tree cluster. Lambda is 1/distance; clusters are born at splits
// and points leave ("fall out") when density drops below their last bridge.
struct CondensedCluster {
    int id = 0;
    int parent = -1;  // -1 for the root
    double birth_lambda = 0.0;
    double death_lambda = 0.0;
    double stability = 0.0;
    int size = 0;  // points that were ever members
    std::vector<int> children;                      // condensed sub-clusters
    std::vector<std::pair<int, double>> fallouts;   // (point index, lambda)
};

struct HdbscanResult {
    std::vector<CondensedCluster> clusters;  // indexed by id, 0 is the root
    std::vector<int> selected;               // excess-of-mass selection (sorted)
    std::vector<int> label;                  // per point: selected cluster id or -1 (noise)
    bool degenerate_single_root = false;     // fewer points than min_cluster_size
};

// HDBSCAN over a Euclidean point set:
//   core distance  = distance to the min_cluster_size-th nearest other point,
//   mutual reach.  = max(core(a), core(b), d(a, b)),
//   MST ties broken by point index, single-linkage condensed with
//   min_cluster_size, clusters picked by excess of mass (root eligible).
// A point that falls out of its selected cluster at the cluster's birth level
// is noise unless the whole cluster departs at one level.
HdbscanResult hdbscan(const std::vector<std::vector<double>>& points, int min_cluster_size);

}  // namespace retsyn
