#include "vbdm/neighbors.hpp"

#include "vbdm/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <queue>
#include <utility>

namespace vbdm {

namespace {

using Cand = std::pair<double, int>;  // (squared distance, index)

double sqdist(const MatrixXd& P, long a, long b) {
  double s = 0.0;
  for (long c = 0; c < P.cols(); ++c) {
    const double d = P(a, c) - P(b, c);
    s += d * d;
  }
  return s;
}

class KdTree {
 public:
  explicit KdTree(const MatrixXd& pts) : P_(pts), idx_(pts.rows()) {
    std::iota(idx_.begin(), idx_.end(), 0);
    nodes_.reserve(2 * (pts.rows() / kLeaf + 1));
    build(0, long(idx_.size()));
  }

  // Fills heap with the k best (squared distance, index) candidates.
  void query(long q, int k, std::priority_queue<Cand>& heap) const {
    search(0, q, k, heap);
  }

 private:
  static constexpr long kLeaf = 16;

  struct Node {
    long lo, hi;
    int dim = -1;
    double split = 0.0;
    int left = -1, right = -1;
  };

  int build(long lo, long hi) {
    const int id = int(nodes_.size());
    nodes_.push_back(Node{lo, hi});
    if (hi - lo <= kLeaf) return id;
    const long dims = P_.cols();
    int best = 0;
    double spread = -1.0;
    for (long c = 0; c < dims; ++c) {
      double mn = std::numeric_limits<double>::infinity(), mx = -mn;
      for (long t = lo; t < hi; ++t) {
        mn = std::min(mn, P_(idx_[t], c));
        mx = std::max(mx, P_(idx_[t], c));
      }
      if (mx - mn > spread) {
        spread = mx - mn;
        best = int(c);
      }
    }
    if (spread <= 0.0) return id;  // all coincident
    const long mid = (lo + hi) / 2;
    std::nth_element(idx_.begin() + lo, idx_.begin() + mid, idx_.begin() + hi,
                     [&](int a, int b) { return P_(a, best) < P_(b, best); });
    const double split = P_(idx_[mid], best);
    nodes_[id].dim = best;
    nodes_[id].split = split;
    const int l = build(lo, mid);
    const int r = build(mid, hi);
    nodes_[id].left = l;
    nodes_[id].right = r;
    return id;
  }

  void search(int id, long q, int k, std::priority_queue<Cand>& heap) const {
    const Node& nd = nodes_[id];
    if (nd.dim < 0) {
      for (long t = nd.lo; t < nd.hi; ++t) {
        const int j = idx_[t];
        const Cand c{sqdist(P_, q, j), j};
        if (int(heap.size()) < k) heap.push(c);
        else if (c < heap.top()) {
          heap.pop();
          heap.push(c);
        }
      }
      return;
    }
    const double diff = P_(q, nd.dim) - nd.split;
    const int near = diff < 0.0 ? nd.left : nd.right;
    const int far = diff < 0.0 ? nd.right : nd.left;
    search(near, q, k, heap);
    // Equal distances still have to be visited for the index tie-break.
    if (int(heap.size()) < k || diff * diff <= heap.top().first) search(far, q, k, heap);
  }

  const MatrixXd& P_;
  std::vector<int> idx_;
  std::vector<Node> nodes_;
};

void fill_row(NeighborGraph& g, const MatrixXd& P, long i, std::vector<Cand>& cands) {
  std::sort(cands.begin(), cands.end());
  // Self first, even when coincident points with smaller index exist.
  auto self = std::find_if(cands.begin(), cands.end(), [&](const Cand& c) { return c.second == i; });
  if (self == cands.end()) {
    cands.pop_back();
    cands.insert(cands.begin(), Cand{0.0, int(i)});
  } else {
    std::rotate(cands.begin(), self, self + 1);
  }
  for (int t = 0; t < g.k; ++t) {
    const int j = cands[t].second;
    g.indices(i, t) = j;
    g.distances(i, t) = j == i ? 0.0 : std::sqrt(sqdist(P, i, j));
  }
}

void check_k(const PointCloud& cloud, int k) {
  if (k < 1) throw Error(ErrorCode::InvalidArgument, "k must be positive");
  if (k > cloud.size())
    throw Error(ErrorCode::KTooLarge, "k=" + std::to_string(k) + " exceeds N=" + std::to_string(cloud.size()));
}

}  // namespace

NeighborGraph knn_brute_force(const PointCloud& cloud, int k) {
  check_k(cloud, k);
  const MatrixXd& P = cloud.points();
  const long N = cloud.size();
  NeighborGraph g;
  g.k = k;
  g.indices.resize(N, k);
  g.distances.resize(N, k);
  std::vector<Cand> all(N);
  for (long i = 0; i < N; ++i) {
    for (long j = 0; j < N; ++j) all[j] = Cand{j == i ? -1.0 : sqdist(P, i, j), int(j)};
    std::sort(all.begin(), all.end());
    std::vector<Cand> head(all.begin(), all.begin() + k);
    head[0].first = 0.0;
    fill_row(g, P, i, head);
  }
  return g;
}

NeighborGraph knn(const PointCloud& cloud, int k) {
  check_k(cloud, k);
  const MatrixXd& P = cloud.points();
  const long N = cloud.size();
  NeighborGraph g;
  g.k = k;
  g.indices.resize(N, k);
  g.distances.resize(N, k);
  std::vector<Cand> cands;
  cands.reserve(k);

  if (cloud.ambient_dim() <= 16) {
    const KdTree tree(P);
    std::vector<Cand> store;
    store.reserve(k);
    for (long i = 0; i < N; ++i) {
      std::priority_queue<Cand> heap(std::less<Cand>(), std::move(store));
      tree.query(i, k, heap);
      cands.clear();
      while (!heap.empty()) {
        cands.push_back(heap.top());
        heap.pop();
      }
      store = std::vector<Cand>();
      store.reserve(k);
      fill_row(g, P, i, cands);
    }
    return g;
  }

  std::vector<Cand> all(N);
  for (long i = 0; i < N; ++i) {
    for (long j = 0; j < N; ++j) all[j] = Cand{sqdist(P, i, j), int(j)};
    std::nth_element(all.begin(), all.begin() + (k - 1), all.end());
    cands.assign(all.begin(), all.begin() + k);
    fill_row(g, P, i, cands);
  }
  return g;
}

bool SparsityPattern::contains(long i, long j) const {
  auto b = cols.begin() + row_ptr[i], e = cols.begin() + row_ptr[i + 1];
  return std::binary_search(b, e, int(j));
}

SparsityPattern symmetrized_support(const NeighborGraph& graph) {
  const long N = graph.size();
  const int k = graph.k;
  std::vector<long> deg(N, k);
  for (long i = 0; i < N; ++i)
    for (int t = 0; t < k; ++t) ++deg[graph.indices(i, t)];
  std::vector<long> start(N + 1, 0);
  for (long i = 0; i < N; ++i) start[i + 1] = start[i] + deg[i];
  std::vector<int> raw(start[N]);
  std::vector<long> fill(start.begin(), start.end() - 1);
  for (long i = 0; i < N; ++i) {
    for (int t = 0; t < k; ++t) {
      const int j = graph.indices(i, t);
      raw[fill[i]++] = j;
      raw[fill[j]++] = int(i);
    }
  }

  SparsityPattern p;
  p.n = N;
  p.row_ptr.assign(N + 1, 0);
  p.diag_pos.assign(N, -1);
  long total = 0;
  for (long i = 0; i < N; ++i) {
    std::sort(raw.begin() + start[i], raw.begin() + start[i + 1]);
    long uniq = 0;
    for (long t = start[i]; t < start[i + 1]; ++t)
      if (t == start[i] || raw[t] != raw[t - 1]) ++uniq;
    total += uniq;
  }
  if (total > std::numeric_limits<int>::max())
    throw Error(ErrorCode::InvalidArgument, "support too large for 32-bit indexing");
  p.cols.reserve(total);
  p.mult.reserve(total);
  for (long i = 0; i < N; ++i) {
    for (long t = start[i]; t < start[i + 1]; ++t) {
      if (t > start[i] && raw[t] == raw[t - 1]) {
        ++p.mult.back();
        continue;
      }
      if (raw[t] == i) p.diag_pos[i] = int(p.cols.size());
      p.cols.push_back(raw[t]);
      p.mult.push_back(1);
    }
    p.row_ptr[i + 1] = int(p.cols.size());
  }
  return p;
}

SparsityPattern full_support(long n) {
  if (n * n > std::numeric_limits<int>::max())
    throw Error(ErrorCode::InvalidArgument, "dense support too large for 32-bit indexing");
  SparsityPattern p;
  p.n = n;
  p.row_ptr.resize(n + 1);
  p.cols.resize(n * n);
  p.mult.assign(n * n, 2);
  p.diag_pos.resize(n);
  for (long i = 0; i < n; ++i) {
    p.row_ptr[i] = int(i * n);
    for (long j = 0; j < n; ++j) p.cols[i * n + j] = int(j);
    p.diag_pos[i] = int(i * n + i);
  }
  p.row_ptr[n] = int(n * n);
  return p;
}

void write_neighbors_csv(const NeighborGraph& graph, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw Error(ErrorCode::Io, "cannot write " + path);
  std::fputs("i,j,distance\n", f);
  for (long i = 0; i < graph.size(); ++i)
    for (int t = 0; t < graph.k; ++t) std::fprintf(f, "%ld,%d,%.17g\n", i, graph.indices(i, t), graph.distances(i, t));
  std::fclose(f);
}

}  // namespace vbdm
