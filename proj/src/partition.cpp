#include "ndgdm/partition.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <set>

namespace ndgdm {

namespace {

// Tie-break tags for collinear centroids, derived from the seed.
std::vector<unsigned long long> tie_tags(int count, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::vector<unsigned long long> tags(count);
  for (auto& t : tags) t = rng();
  return tags;
}

// Splits `elements` into `parts` contiguous-coordinate chunks, filling
// `out` with part ids offset by `first_part`. Counts are balanced by
// proportional splitting at every bisection.
void bisect(const Mesh& mesh, std::vector<int>& elements, int parts, int first_part,
            const std::vector<unsigned long long>& tags, std::vector<int>& out) {
  if (parts == 1) {
    for (int e : elements) out[e] = first_part;
    return;
  }
  const int left_parts = parts / 2;
  const auto cut = elements.begin() +
                   static_cast<std::ptrdiff_t>(elements.size() * left_parts / parts);

  Eigen::Vector2d lo = Eigen::Vector2d::Constant(std::numeric_limits<double>::max());
  Eigen::Vector2d hi = Eigen::Vector2d::Constant(std::numeric_limits<double>::lowest());
  for (int e : elements) {
    const Eigen::Vector2d c = mesh.centroid(e);
    lo = lo.cwiseMin(c);
    hi = hi.cwiseMax(c);
  }
  const int axis = (hi - lo).x() >= (hi - lo).y() ? 0 : 1;

  std::nth_element(elements.begin(), cut, elements.end(), [&](int a, int b) {
    const double ca = mesh.centroid(a)[axis], cb = mesh.centroid(b)[axis];
    if (ca != cb) return ca < cb;
    return tags[a] < tags[b];
  });

  std::vector<int> left(elements.begin(), cut), right(cut, elements.end());
  bisect(mesh, left, left_parts, first_part, tags, out);
  bisect(mesh, right, parts - left_parts, first_part + left_parts, tags, out);
}

// Connected components of `elements` under the element-edge graph,
// restricted to the given set. Components are ordered by smallest element.
std::vector<std::vector<int>> components_of(const std::vector<int>& elements,
                                            const std::vector<std::array<int, 3>>& neighbors,
                                            const std::vector<char>& in_set) {
  std::vector<std::vector<int>> components;
  std::set<int> remaining(elements.begin(), elements.end());
  while (!remaining.empty()) {
    std::vector<int> component, stack{*remaining.begin()};
    remaining.erase(remaining.begin());
    while (!stack.empty()) {
      const int e = stack.back();
      stack.pop_back();
      component.push_back(e);
      for (int nb : neighbors[e]) {
        if (nb < 0 || !in_set[nb]) continue;
        auto it = remaining.find(nb);
        if (it != remaining.end()) {
          remaining.erase(it);
          stack.push_back(nb);
        }
      }
    }
    components.push_back(std::move(component));
  }
  return components;
}

// Moves stray fragments of every part onto the adjacent part they share the
// most faces with, keeping each part's largest component in place.
void repair_connectivity(const std::vector<int>& working_set,
                         const std::vector<std::array<int, 3>>& neighbors,
                         std::vector<int>& part_of, int n_parts, int first_part) {
  std::vector<char> in_set(neighbors.size(), 0);
  for (int e : working_set) in_set[e] = 1;

  for (int round = 0; round < 64; ++round) {
    bool moved = false;
    for (int p = first_part; p < first_part + n_parts; ++p) {
      std::vector<int> members;
      for (int e : working_set)
        if (part_of[e] == p) members.push_back(e);
      if (members.empty()) continue;
      auto comps = components_of(members, neighbors, in_set);
      if (comps.size() <= 1) continue;

      // keep the largest component, ties resolved by smallest element id
      size_t keep = 0;
      for (size_t c = 1; c < comps.size(); ++c)
        if (comps[c].size() > comps[keep].size()) keep = c;

      for (size_t c = 0; c < comps.size(); ++c) {
        if (c == keep) continue;
        std::map<int, int> shared;  // neighbor part -> face count
        for (int e : comps[c])
          for (int nb : neighbors[e])
            if (nb >= 0 && in_set[nb] && part_of[nb] != p) ++shared[part_of[nb]];
        if (shared.empty()) continue;  // isolated, leave for the next round
        const int target =
            std::max_element(shared.begin(), shared.end(), [](const auto& a, const auto& b) {
              return a.second != b.second ? a.second < b.second : a.first > b.first;
            })->first;
        for (int e : comps[c]) part_of[e] = target;
        moved = true;
      }
    }
    if (!moved) return;
  }
  throw PartitionError("connectivity repair did not settle");
}

// Bisection plus repair of one connected working set.
void partition_set(const Mesh& mesh, const std::vector<int>& working_set, int parts,
                   int first_part, const std::vector<unsigned long long>& tags,
                   const std::vector<std::array<int, 3>>& neighbors, std::vector<int>& out) {
  if (parts > static_cast<int>(working_set.size()))
    throw PartitionError("cannot cut " + std::to_string(working_set.size()) +
                         " elements into " + std::to_string(parts) + " parts");
  std::vector<int> elements = working_set;
  bisect(mesh, elements, parts, first_part, tags, out);
  if (parts > 1) repair_connectivity(working_set, neighbors, out, parts, first_part);
}

// Apportions `total_parts` over component sizes, at least one part each,
// remaining parts granted one by one to the component with the largest
// elements-per-part average.
std::vector<int> apportion(const std::vector<size_t>& sizes, int total_parts) {
  const int n = static_cast<int>(sizes.size());
  if (total_parts < n)
    throw PartitionError("fewer parts than components to respect (" +
                         std::to_string(total_parts) + " < " + std::to_string(n) + ")");
  std::vector<int> parts(n, 1);
  for (int assigned = n; assigned < total_parts; ++assigned) {
    int best = -1;
    double best_avg = 0.0;
    for (int i = 0; i < n; ++i) {
      if (parts[i] >= static_cast<int>(sizes[i])) continue;
      const double avg = static_cast<double>(sizes[i]) / (parts[i] + 1);
      if (best < 0 || avg > best_avg) {
        best = i;
        best_avg = avg;
      }
    }
    if (best < 0) throw PartitionError("more parts requested than elements available");
    ++parts[best];
  }
  for (int i = 0; i < n; ++i)
    if (parts[i] > static_cast<int>(sizes[i]))
      throw PartitionError("component of " + std::to_string(sizes[i]) +
                           " elements cannot host " + std::to_string(parts[i]) + " parts");
  return parts;
}

}  // namespace

std::vector<int> partition_mesh(const Mesh& mesh, int n_parts, bool respect_materials,
                                unsigned seed) {
  const int nt = mesh.n_triangles();
  if (n_parts < 1 || n_parts > nt)
    throw PartitionError("part count " + std::to_string(n_parts) + " out of range [1," +
                         std::to_string(nt) + "]");
  const auto tags = tie_tags(nt, seed);
  const auto neighbors = element_neighbors(mesh);
  std::vector<int> part_of(nt, -1);

  if (!respect_materials) {
    std::vector<int> all(nt);
    std::iota(all.begin(), all.end(), 0);
    partition_set(mesh, all, n_parts, 0, tags, neighbors, part_of);
    return part_of;
  }

  // edge-connected components of constant material, in smallest-element order
  std::vector<char> visited(nt, 0);
  std::vector<std::vector<int>> components;
  for (int start = 0; start < nt; ++start) {
    if (visited[start]) continue;
    std::vector<int> component, stack{start};
    visited[start] = 1;
    while (!stack.empty()) {
      const int e = stack.back();
      stack.pop_back();
      component.push_back(e);
      for (int nb : neighbors[e])
        if (nb >= 0 && !visited[nb] && mesh.material[nb] == mesh.material[e]) {
          visited[nb] = 1;
          stack.push_back(nb);
        }
    }
    components.push_back(std::move(component));
  }

  std::vector<size_t> sizes;
  sizes.reserve(components.size());
  for (const auto& c : components) sizes.push_back(c.size());
  const auto parts = apportion(sizes, n_parts);
  int first = 0;
  for (size_t c = 0; c < components.size(); ++c) {
    partition_set(mesh, components[c], parts[c], first, tags, neighbors, part_of);
    first += parts[c];
  }
  return part_of;
}

std::vector<int> agglomerate_coarse(const Mesh& mesh, const std::vector<int>& subdomain_of,
                                    int parts_per_subdomain, unsigned seed) {
  if (parts_per_subdomain < 1) throw PartitionError("parts per subdomain must be at least 1");
  if (subdomain_of.size() != static_cast<size_t>(mesh.n_triangles()))
    throw PartitionError("subdomain map size mismatch");
  if (parts_per_subdomain == 1) return subdomain_of;

  const int n_subdomains = *std::max_element(subdomain_of.begin(), subdomain_of.end()) + 1;
  const auto tags = tie_tags(mesh.n_triangles(), seed);
  const auto neighbors = element_neighbors(mesh);
  std::vector<int> agglomerate_of(mesh.n_triangles(), -1);

  std::vector<char> in_sub(mesh.n_triangles(), 0);
  int next_id = 0;
  for (int s = 0; s < n_subdomains; ++s) {
    std::vector<int> members;
    for (int e = 0; e < mesh.n_triangles(); ++e)
      if (subdomain_of[e] == s) members.push_back(e);
    if (members.empty()) throw PartitionError("subdomain " + std::to_string(s) + " is empty");

    std::fill(in_sub.begin(), in_sub.end(), 0);
    for (int e : members) in_sub[e] = 1;
    const auto comps = components_of(members, neighbors, in_sub);
    if (static_cast<int>(comps.size()) > parts_per_subdomain)
      throw PartitionError("subdomain " + std::to_string(s) + " has " +
                           std::to_string(comps.size()) +
                           " components, cannot form " + std::to_string(parts_per_subdomain) +
                           " connected agglomerates");
    std::vector<size_t> sizes;
    for (const auto& c : comps) sizes.push_back(c.size());
    const auto parts = apportion(sizes, parts_per_subdomain);
    for (size_t c = 0; c < comps.size(); ++c) {
      partition_set(mesh, comps[c], parts[c], next_id, tags, neighbors, agglomerate_of);
      next_id += parts[c];
    }
  }
  return agglomerate_of;
}

std::pair<std::vector<std::vector<int>>, int> subdomain_adjacency(
    const Mesh& mesh, const std::vector<int>& subdomain_of) {
  const int n_subdomains = *std::max_element(subdomain_of.begin(), subdomain_of.end()) + 1;
  std::vector<std::set<int>> sets(n_subdomains);
  for (const auto& face : build_face_topology(mesh)) {
    if (face.kind != FaceKind::interior) continue;
    const int a = subdomain_of[face.left], b = subdomain_of[face.right];
    if (a == b) continue;
    sets[a].insert(b);
    sets[b].insert(a);
  }
  std::vector<std::vector<int>> adjacency(n_subdomains);
  int max_neighbors = 0;
  for (int s = 0; s < n_subdomains; ++s) {
    adjacency[s].assign(sets[s].begin(), sets[s].end());
    max_neighbors = std::max(max_neighbors, static_cast<int>(adjacency[s].size()));
  }
  return {adjacency, max_neighbors};
}

Partition make_partition(const Mesh& mesh, int n_subdomains, int parts_per_subdomain,
                         bool respect_materials, unsigned seed) {
  Partition partition;
  partition.subdomain_of = partition_mesh(mesh, n_subdomains, respect_materials, seed);
  partition.agglomerate_of =
      agglomerate_coarse(mesh, partition.subdomain_of, parts_per_subdomain, seed);
  partition.n_subdomains = n_subdomains;
  partition.n_coarse =
      *std::max_element(partition.agglomerate_of.begin(), partition.agglomerate_of.end()) + 1;
  std::tie(partition.adjacency, partition.max_neighbors) =
      subdomain_adjacency(mesh, partition.subdomain_of);

  // nesting: an agglomerate never crosses a subdomain boundary
  std::vector<int> owner(partition.n_coarse, -1);
  for (int e = 0; e < mesh.n_triangles(); ++e) {
    int& o = owner[partition.agglomerate_of[e]];
    if (o < 0) o = partition.subdomain_of[e];
    if (o != partition.subdomain_of[e])
      throw PartitionError("agglomerate " + std::to_string(partition.agglomerate_of[e]) +
                           " crosses subdomains");
  }

  // every agglomerate is edge-connected
  const auto neighbors = element_neighbors(mesh);
  std::vector<char> everywhere(mesh.n_triangles(), 1);
  std::vector<std::vector<int>> members(partition.n_coarse);
  for (int e = 0; e < mesh.n_triangles(); ++e) members[partition.agglomerate_of[e]].push_back(e);
  for (int a = 0; a < partition.n_coarse; ++a) {
    std::vector<char> in_set(mesh.n_triangles(), 0);
    for (int e : members[a]) in_set[e] = 1;
    if (components_of(members[a], neighbors, in_set).size() != 1)
      throw PartitionError("agglomerate " + std::to_string(a) + " is not edge-connected");
  }
  return partition;
}

void save_partition(const Partition& partition, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  for (size_t e = 0; e < partition.subdomain_of.size(); ++e)
    out << partition.subdomain_of[e] << ' ' << partition.agglomerate_of[e] << '\n';
  if (!out) throw Error("write to '" + path + "' failed");
}

}  // namespace ndgdm
