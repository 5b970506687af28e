#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace minoragg {

// A message is a canonical byte string. Its charged size is the payload plus
// a varint length prefix.
using Message = std::string;

inline std::size_t varint_size(std::uint64_t v) {
  std::size_t k = 1;
  while (v >= 0x80) v >>= 7, ++k;
  return k;
}

inline std::size_t message_bits(const Message& m) { return 8 * (m.size() + varint_size(m.size())); }

class Writer {
 public:
  Writer& u(std::uint64_t v) {
    while (v >= 0x80) {
      s_.push_back(static_cast<char>((v & 0x7f) | 0x80));
      v >>= 7;
    }
    s_.push_back(static_cast<char>(v));
    return *this;
  }
  Writer& i(std::int64_t v) { return u((static_cast<std::uint64_t>(v) << 1) ^ static_cast<std::uint64_t>(v >> 63)); }
  Writer& raw(const Message& m) {
    u(m.size());
    s_ += m;
    return *this;
  }
  Message str() && { return std::move(s_); }
  const Message& str() const& { return s_; }

 private:
  Message s_;
};

class Reader {
 public:
  explicit Reader(const Message& m) : p_(m.data()), e_(m.data() + m.size()) {}
  bool done() const { return p_ == e_; }
  std::uint64_t u() {
    std::uint64_t v = 0;
    int shift = 0;
    while (true) {
      if (p_ == e_) throw std::runtime_error("truncated message");
      auto b = static_cast<unsigned char>(*p_++);
      v |= static_cast<std::uint64_t>(b & 0x7f) << shift;
      if (!(b & 0x80)) break;
      shift += 7;
    }
    return v;
  }
  std::int64_t i() {
    std::uint64_t z = u();
    return static_cast<std::int64_t>((z >> 1) ^ (~(z & 1) + 1));
  }
  Message raw() {
    std::size_t k = u();
    if (static_cast<std::size_t>(e_ - p_) < k) throw std::runtime_error("truncated message");
    Message m(p_, k);
    p_ += k;
    return m;
  }

 private:
  const char* p_;
  const char* e_;
};

inline Message enc_i(std::int64_t v) { return Writer().i(v).str(); }
inline Message enc_u(std::uint64_t v) { return Writer().u(v).str(); }
inline std::int64_t dec_i(const Message& m) { return Reader(m).i(); }
inline std::uint64_t dec_u(const Message& m) { return Reader(m).u(); }

inline Message enc_tuple(std::initializer_list<std::int64_t> xs) {
  Writer w;
  for (auto x : xs) w.i(x);
  return std::move(w).str();
}
inline std::vector<std::int64_t> dec_tuple(const Message& m) {
  std::vector<std::int64_t> out;
  Reader r(m);
  while (!r.done()) out.push_back(r.i());
  return out;
}

inline Message enc_pair(const Message& a, const Message& b) { return Writer().raw(a).raw(b).str(); }
inline std::pair<Message, Message> dec_pair(const Message& m) {
  Reader r(m);
  Message a = r.raw();
  Message b = r.raw();
  return {std::move(a), std::move(b)};
}

// Sorted (key, value) list, the encoding shared by associative arrays and
// heavy-hitter sketches.
using KV = std::vector<std::pair<std::uint64_t, std::int64_t>>;

inline Message enc_kv(const KV& kv) {
  Writer w;
  for (auto [k, v] : kv) w.u(k).i(v);
  return std::move(w).str();
}
inline KV dec_kv(const Message& m) {
  KV kv;
  Reader r(m);
  while (!r.done()) {
    auto k = r.u();
    kv.push_back({k, r.i()});
  }
  return kv;
}

inline Message enc_ids(const std::vector<std::uint64_t>& ids) {
  Writer w;
  for (auto x : ids) w.u(x);
  return std::move(w).str();
}
inline std::vector<std::uint64_t> dec_ids(const Message& m) {
  std::vector<std::uint64_t> out;
  Reader r(m);
  while (!r.done()) out.push_back(r.u());
  return out;
}

// ---------- aggregation operators ----------

struct Operator {
  std::string name;
  Message identity;
  std::function<Message(const Message&, const Message&)> fn;
  bool order_sensitive = false;
  // combine(identity, x) == x holds for every operator here, which lets the
  // engine skip identity operands.
  Message combine(const Message& a, const Message& b) const {
    if (a == identity) return b;
    if (b == identity) return a;
    return fn(a, b);
  }
};
using OpPtr = std::shared_ptr<const Operator>;

namespace ops {

inline OpPtr make(std::string name, Message id, std::function<Message(const Message&, const Message&)> f,
                  bool order_sensitive = false) {
  return std::make_shared<Operator>(Operator{std::move(name), std::move(id), std::move(f), order_sensitive});
}

// Identity is the empty message for the scalar operators; values are zigzag
// varints.
inline OpPtr sum() {
  static OpPtr p = make("sum", "", [](const Message& a, const Message& b) { return enc_i(dec_i(a) + dec_i(b)); });
  return p;
}
inline OpPtr min() {
  static OpPtr p = make("min", "", [](const Message& a, const Message& b) { return enc_i(std::min(dec_i(a), dec_i(b))); });
  return p;
}
inline OpPtr max() {
  static OpPtr p = make("max", "", [](const Message& a, const Message& b) { return enc_i(std::max(dec_i(a), dec_i(b))); });
  return p;
}
inline OpPtr bit_or() {
  static OpPtr p = make("or", "", [](const Message& a, const Message& b) { return enc_u(dec_u(a) | dec_u(b)); });
  return p;
}

// Lexicographic min/max over integer tuples.
inline OpPtr tuple_min() {
  static OpPtr p = make("tuple-min", "", [](const Message& a, const Message& b) {
    return dec_tuple(a) <= dec_tuple(b) ? a : b;
  });
  return p;
}
inline OpPtr tuple_max() {
  static OpPtr p = make("tuple-max", "", [](const Message& a, const Message& b) {
    return dec_tuple(a) >= dec_tuple(b) ? a : b;
  });
  return p;
}

// Keeps the first non-identity operand in the canonical order. Used for
// broadcasts where at most one node contributes.
inline OpPtr first() {
  static OpPtr p = make("first", "", [](const Message& a, const Message&) { return a; }, true);
  return p;
}

// Concatenation of length-prefixed records; order sensitive.
inline OpPtr concat() {
  static OpPtr p = make("concat", "", [](const Message& a, const Message& b) { return a + b; }, true);
  return p;
}

// Componentwise pair of two operators.
inline OpPtr pair(OpPtr x, OpPtr y) {
  Message id = enc_pair(x->identity, y->identity);
  return make("pair(" + x->name + "," + y->name + ")", id,
              [x, y](const Message& a, const Message& b) {
                auto [a1, a2] = dec_pair(a);
                auto [b1, b2] = dec_pair(b);
                return enc_pair(x->combine(a1, b1), y->combine(a2, b2));
              },
              x->order_sensitive || y->order_sensitive);
}

// Union of id sets, capped. Overflow keeps the smallest ids and sets a
// trailing marker the caller can test with union_overflowed.
inline constexpr std::uint64_t kUnionOverflow = ~0ull >> 1;
inline OpPtr bounded_union(std::size_t cap) {
  return make("bounded-union", "", [cap](const Message& a, const Message& b) {
    auto x = dec_ids(a), y = dec_ids(b);
    std::vector<std::uint64_t> out;
    std::set_union(x.begin(), x.end(), y.begin(), y.end(), std::back_inserter(out));
    out.erase(std::unique(out.begin(), out.end()), out.end());
    if (out.size() > cap + (out.back() == kUnionOverflow)) {
      out.resize(cap);
      out.push_back(kUnionOverflow);
    }
    return enc_ids(out);
  });
}
inline bool union_overflowed(const std::vector<std::uint64_t>& ids) {
  return !ids.empty() && ids.back() == kUnionOverflow;
}

// Associative array with summed values; zero entries are dropped.
inline KV kv_add(const KV& a, const KV& b) {
  KV out;
  std::size_t i = 0, j = 0;
  while (i < a.size() || j < b.size()) {
    if (j == b.size() || (i < a.size() && a[i].first < b[j].first)) {
      out.push_back(a[i++]);
    } else if (i == a.size() || b[j].first < a[i].first) {
      out.push_back(b[j++]);
    } else {
      auto v = a[i].second + b[j].second;
      if (v != 0) out.push_back({a[i].first, v});
      ++i, ++j;
    }
  }
  return out;
}
inline OpPtr assoc_sum() {
  static OpPtr p = make("assoc-sum", "", [](const Message& a, const Message& b) {
    return enc_kv(kv_add(dec_kv(a), dec_kv(b)));
  });
  return p;
}

}  // namespace ops

// ---------- Misra-Gries heavy hitters ----------

struct HeavyHitterSketch {
  std::size_t h = 4;
  std::int64_t total = 0;  // W, the weight of everything merged in
  KV counters;             // sorted by object id, at most h entries, positive counts

  static HeavyHitterSketch single(std::size_t h, std::uint64_t obj, std::int64_t weight) {
    HeavyHitterSketch s{h, 0, {}};
    if (weight > 0) s.total = weight, s.counters.push_back({obj, weight});
    return s;
  }
  Message encode() const {
    if (total == 0) return {};
    return Writer().i(total).raw(enc_kv(counters)).str();
  }
  static HeavyHitterSketch decode(std::size_t h, const Message& m) {
    if (m.empty()) return {h, 0, {}};
    Reader r(m);
    std::int64_t w = r.i();
    return {h, w, dec_kv(r.raw())};
  }
  // Counters underestimate by at most W/(h+1), so keeping estimates above
  // W/h includes everything above 2W/h and nothing at or below W/h.
  std::vector<std::uint64_t> output() const {
    std::vector<std::uint64_t> out;
    for (auto [k, c] : counters)
      if (c * static_cast<std::int64_t>(h) > total) out.push_back(k);
    return out;
  }
  bool contains(std::uint64_t obj) const {
    auto o = output();
    return std::find(o.begin(), o.end(), obj) != o.end();
  }
};

struct CapacityMismatch : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Pointwise add, then subtract the (h+1)-th largest count and drop
// non-positive entries.
inline HeavyHitterSketch heavy_hitter_combine(const HeavyHitterSketch& a, const HeavyHitterSketch& b) {
  if (a.h != b.h) throw CapacityMismatch("heavy-hitter capacities differ");
  KV sum = ops::kv_add(a.counters, b.counters);
  HeavyHitterSketch out{a.h, a.total + b.total, {}};
  if (sum.size() <= a.h) {
    out.counters = std::move(sum);
    return out;
  }
  std::vector<std::int64_t> vals;
  for (auto& kv : sum) vals.push_back(kv.second);
  std::nth_element(vals.begin(), vals.begin() + static_cast<long>(a.h), vals.end(), std::greater<>());
  std::int64_t cut = vals[a.h];
  for (auto& [k, v] : sum)
    if (v - cut > 0) out.counters.push_back({k, v - cut});
  return out;
}

namespace ops {
inline OpPtr heavy_hitter(std::size_t h) {
  return make("heavy-hitter", "", [h](const Message& a, const Message& b) {
    return heavy_hitter_combine(HeavyHitterSketch::decode(h, a), HeavyHitterSketch::decode(h, b)).encode();
  }, true);
}
}  // namespace ops

}  // namespace minoragg
