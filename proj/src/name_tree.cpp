#include "dtnname/name_tree.hpp"

#include "dtnname/text.hpp"

#include <algorithm>
#include <iterator>
#include <set>

namespace dtnname {

namespace {

using AttributeNode = NameTree::AttributeNode;
using ValueNode = NameTree::ValueNode;

template <typename Node, typename Key>
Node* find_node(std::vector<Node>& nodes, const Key& key, std::string Node::*field)
{
  auto it = std::find_if(nodes.begin(), nodes.end(), [&](const Node& n) { return n.*field == key; });
  return it == nodes.end() ? nullptr : &*it;
}

template <typename Node, typename Key>
const Node* find_node(const std::vector<Node>& nodes, const Key& key, std::string Node::*field)
{
  auto it = std::find_if(nodes.begin(), nodes.end(), [&](const Node& n) { return n.*field == key; });
  return it == nodes.end() ? nullptr : &*it;
}

void merge(std::vector<AttributeNode>& level, const std::vector<AvPair>& pairs, RecordId id)
{
  for (const AvPair& pair : pairs) {
    AttributeNode* attr = find_node(level, pair.attribute(), &AttributeNode::attribute);
    if (attr == nullptr) {
      attr = &level.emplace_back(AttributeNode{pair.attribute(), {}});
    }
    ValueNode* val = find_node(attr->values, pair.value(), &ValueNode::value);
    if (val == nullptr) {
      val = &attr->values.emplace_back(ValueNode{pair.value(), {}, {}});
    }
    if (pair.children().empty()) {
      if (std::find(val->records.begin(), val->records.end(), id) == val->records.end()) {
        val->records.push_back(id);
      }
    } else {
      merge(val->children, pair.children(), id);
    }
  }
}

void collect_subtree(const ValueNode& node, std::set<RecordId>& out)
{
  out.insert(node.records.begin(), node.records.end());
  for (const AttributeNode& attr : node.children) {
    for (const ValueNode& val : attr.values) {
      collect_subtree(val, out);
    }
  }
}

// Records of every stored specifier that the query pairs match at this level.
std::set<RecordId> resolve(const std::vector<AttributeNode>& level, const std::vector<AvPair>& query)
{
  std::set<RecordId> result;
  bool first = true;
  for (const AvPair& pair : query) {
    const AttributeNode* attr = find_node(level, pair.attribute(), &AttributeNode::attribute);
    const ValueNode* val = attr ? find_node(attr->values, pair.value(), &ValueNode::value) : nullptr;
    if (val == nullptr) {
      return {};
    }
    std::set<RecordId> found;
    if (pair.children().empty()) {
      collect_subtree(*val, found);
    } else {
      found = resolve(val->children, pair.children());
    }
    if (first) {
      result = std::move(found);
      first = false;
    } else {
      std::set<RecordId> both;
      std::set_intersection(result.begin(), result.end(), found.begin(), found.end(),
                            std::inserter(both, both.end()));
      result = std::move(both);
    }
    if (result.empty()) {
      return {};
    }
  }
  return result;
}

// Removes references to dead records; returns true when the level is empty.
bool prune(std::vector<AttributeNode>& level, const std::set<RecordId>& dead)
{
  for (AttributeNode& attr : level) {
    for (ValueNode& val : attr.values) {
      std::erase_if(val.records, [&](RecordId id) { return dead.contains(id); });
      prune(val.children, dead);
    }
    std::erase_if(attr.values, [](const ValueNode& v) { return v.records.empty() && v.children.empty(); });
  }
  std::erase_if(level, [](const AttributeNode& a) { return a.values.empty(); });
  return level.empty();
}

}  // namespace

RecordId NameTree::insert(const NameSpecifier& ns, NameRecord record, double now)
{
  if (record.destination_eid.empty()) {
    throw NameTreeError("name-record without destination EID");
  }
  if (record.expires_at < now) {
    throw NameTreeError("name-record already expired at insertion");
  }
  auto key = std::pair(serialize(ns), record.destination_eid);
  if (auto it = by_key_.find(key); it != by_key_.end()) {
    entries_.at(it->second).record = std::move(record);
    return it->second;
  }
  const RecordId id = next_id_++;
  merge(root_, ns.roots(), id);
  entries_.emplace(id, Stored{ns, std::move(record)});
  by_key_.emplace(std::move(key), id);
  return id;
}

std::vector<RecordId> NameTree::sorted_ids(std::vector<RecordId> ids) const
{
  std::sort(ids.begin(), ids.end(), [&](RecordId a, RecordId b) {
    const std::string& ea = entries_.at(a).record.destination_eid;
    const std::string& eb = entries_.at(b).record.destination_eid;
    return ea != eb ? ea < eb : a < b;
  });
  return ids;
}

std::vector<NameRecord> NameTree::lookup(const NameSpecifier& query, double now) const
{
  std::vector<RecordId> hits;
  for (RecordId id : resolve(root_, query.roots())) {
    if (entries_.at(id).record.expires_at >= now) {
      hits.push_back(id);
    }
  }
  std::vector<NameRecord> out;
  for (RecordId id : sorted_ids(std::move(hits))) {
    out.push_back(entries_.at(id).record);
  }
  return out;
}

std::size_t NameTree::expire(double now)
{
  std::set<RecordId> dead;
  for (const auto& [id, stored] : entries_) {
    if (stored.record.expires_at < now) {
      dead.insert(id);
    }
  }
  if (dead.empty()) {
    return 0;
  }
  for (RecordId id : dead) {
    const Stored& stored = entries_.at(id);
    by_key_.erase(std::pair(serialize(stored.specifier), stored.record.destination_eid));
    entries_.erase(id);
  }
  prune(root_, dead);
  return dead.size();
}

std::vector<NameTree::Entry> NameTree::entries() const
{
  std::vector<RecordId> ids;
  for (const auto& [id, stored] : entries_) {
    ids.push_back(id);
  }
  std::vector<Entry> out;
  for (RecordId id : sorted_ids(std::move(ids))) {
    const Stored& stored = entries_.at(id);
    out.push_back(Entry{id, stored.specifier, stored.record});
  }
  return out;
}

std::string NameTree::dump() const
{
  std::string out;
  for (const Entry& e : entries()) {
    out += e.record.destination_eid;
    out += ' ';
    out += format_number(e.record.expires_at);
    out += ' ';
    out += serialize(e.specifier);
    out += '\n';
  }
  return out;
}

}  // namespace dtnname
