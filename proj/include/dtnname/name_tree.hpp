#ifndef DTNNAME_NAME_TREE_HPP
#define DTNNAME_NAME_TREE_HPP

// The name knowledge base: every specifier a node knows about merged into a
// single tree. Unlike a specifier, an attribute node here may own many value
// nodes. Each leaf value of an inserted specifier points at that specifier's
// name-record, so a query is answered by walking the tree along the query's
// av-pairs and intersecting the record sets found underneath.

#include "dtnname/name_specifier.hpp"

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace dtnname {

using RecordId = std::uint64_t;

struct NameRecord {
  std::string destination_eid;
  std::vector<std::string> next_hop_eids;  // routing hints, never match keys
  double expires_at = 0.0;

  friend bool operator==(const NameRecord&, const NameRecord&) = default;
};

class NameTreeError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

class NameTree {
public:
  struct ValueNode;

  struct AttributeNode {
    std::string attribute;
    std::vector<ValueNode> values;
  };

  struct ValueNode {
    std::string value;
    std::vector<AttributeNode> children;
    std::vector<RecordId> records;  // set on leaf values only
  };

  struct Entry {
    RecordId id;
    NameSpecifier specifier;
    NameRecord record;
  };

  /// Merges `ns` into the tree. Re-inserting the same (specifier,
  /// destination_eid) refreshes the existing record in place and returns its
  /// id. Throws NameTreeError if the record is already expired or has no
  /// destination.
  RecordId insert(const NameSpecifier& ns, NameRecord record, double now);

  /// Unexpired records whose specifier is matched by `query`, ordered by
  /// destination_eid (insertion order among equal EIDs).
  std::vector<NameRecord> lookup(const NameSpecifier& query, double now) const;

  /// Drops records with expires_at < now and prunes branches left without
  /// records. Returns the number of records removed.
  std::size_t expire(double now);

  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }

  const std::vector<AttributeNode>& root() const noexcept { return root_; }

  /// All stored entries (expired ones included until expire() runs), sorted
  /// like lookup results.
  std::vector<Entry> entries() const;

  /// One line per record: "<destination_eid> <expires_at> <specifier>",
  /// sorted by EID.
  std::string dump() const;

private:
  struct Stored {
    NameSpecifier specifier;
    NameRecord record;
  };

  std::vector<RecordId> sorted_ids(std::vector<RecordId> ids) const;

  std::vector<AttributeNode> root_;
  std::map<RecordId, Stored> entries_;
  std::map<std::pair<std::string, std::string>, RecordId> by_key_;
  RecordId next_id_ = 1;
};

}  // namespace dtnname

#endif  // DTNNAME_NAME_TREE_HPP
