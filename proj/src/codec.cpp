#include "saog/codec.hpp"

#include <bit>
#include <cmath>
#include <string>

#include "saog/errors.hpp"

namespace saog {

namespace {

constexpr std::uint8_t kMagic[4] = {'S', 'P', 'G', '1'};

class Writer {
public:
    explicit Writer(std::size_t reserve) { bytes_.reserve(reserve); }
    void u8(std::uint8_t v) { bytes_.push_back(v); }
    void u16(std::uint16_t v) {
        u8(static_cast<std::uint8_t>(v & 0xFF));
        u8(static_cast<std::uint8_t>(v >> 8));
    }
    void f32(float v) {
        const auto bits = std::bit_cast<std::uint32_t>(v);
        for (int i = 0; i < 4; ++i) u8(static_cast<std::uint8_t>(bits >> (8 * i)));
    }
    std::vector<std::uint8_t> take() { return std::move(bytes_); }

private:
    std::vector<std::uint8_t> bytes_;
};

class Reader {
public:
    explicit Reader(std::span<const std::uint8_t> b) : b_(b) {}
    void need(std::size_t n, const char* what, std::size_t expected_total) const {
        if (pos_ + n > b_.size()) {
            throw FormatError(std::string("truncated SPG1 payload while reading ") + what + ": expected " +
                                  std::to_string(expected_total) + " bytes, got " + std::to_string(b_.size()),
                              b_.size());
        }
    }
    std::uint8_t u8() { return b_[pos_++]; }
    std::uint16_t u16() {
        const std::uint16_t lo = u8();
        return static_cast<std::uint16_t>(lo | (static_cast<std::uint16_t>(u8()) << 8));
    }
    float f32() {
        std::uint32_t bits = 0;
        for (int i = 0; i < 4; ++i) bits |= static_cast<std::uint32_t>(u8()) << (8 * i);
        return std::bit_cast<float>(bits);
    }
    std::size_t pos() const { return pos_; }
    std::size_t size() const { return b_.size(); }

private:
    std::span<const std::uint8_t> b_;
    std::size_t pos_ = 0;
};

} // namespace

std::vector<std::uint8_t> encode_parse_graph_compact(const ParseGraph& g, const GrammarSpec& spec) {
    if (g.objects.size() > 255) {
        throw OverflowError("SPG1 holds at most 255 objects, graph has " + std::to_string(g.objects.size()));
    }
    if (g.relations.size() > 65535) {
        throw OverflowError("SPG1 holds at most 65535 relations, graph has " + std::to_string(g.relations.size()));
    }
    Writer w(compact_size(g.objects.size(), g.relations.size()));
    for (auto m : kMagic) w.u8(m);
    w.u8(static_cast<std::uint8_t>(g.objects.size()));
    w.u16(static_cast<std::uint16_t>(g.relations.size()));
    for (const auto& o : g.objects) {
        if (o.label_index < 0 || o.label_index > 255) {
            throw OverflowError("label " + std::to_string(o.label_index) + " does not fit in one byte");
        }
        const auto size = spec.size_index(o.size_name);
        if (!size) throw UnknownSymbolError("unknown size '" + o.size_name + "'");
        if (*size > 255) throw OverflowError("size index does not fit in one byte");
        w.u8(static_cast<std::uint8_t>(o.label_index));
        w.u8(static_cast<std::uint8_t>(*size));
        w.f32(static_cast<float>(o.location.x));
        w.f32(static_cast<float>(o.location.y));
        w.f32(static_cast<float>(o.location.z));
        const auto centi = static_cast<long>(std::lround(o.rotation * 100.0)) % 36000;
        w.u16(static_cast<std::uint16_t>(centi < 0 ? centi + 36000 : centi));
    }
    for (const auto& r : g.relations) {
        if (r.relation_type < 0 || r.relation_type > 255 || r.subject < 0 || r.subject > 255 || r.object < 0 ||
            r.object > 255) {
            throw OverflowError("relation field does not fit in one byte");
        }
        w.u8(static_cast<std::uint8_t>(r.relation_type));
        w.u8(static_cast<std::uint8_t>(r.subject));
        w.u8(static_cast<std::uint8_t>(r.object));
    }
    return w.take();
}

ParseGraph decode_parse_graph_compact(std::span<const std::uint8_t> bytes, const GrammarSpec& spec) {
    Reader r(bytes);
    r.need(kCompactHeaderBytes, "header", kCompactHeaderBytes);
    for (std::size_t i = 0; i < 4; ++i) {
        if (r.u8() != kMagic[i]) throw FormatError("bad SPG1 magic", i);
    }
    const std::size_t n_objects = r.u8();
    const std::size_t n_relations = r.u16();
    const std::size_t expected = compact_size(n_objects, n_relations);

    ParseGraph g;
    g.n_s = static_cast<int>(n_objects);
    g.objects.resize(n_objects);
    for (std::size_t i = 0; i < n_objects; ++i) {
        r.need(kCompactObjectBytes, "object", expected);
        auto& o = g.objects[i];
        o.label_index = r.u8();
        const std::size_t size_at = r.pos();
        const std::size_t size = r.u8();
        if (size >= spec.sizes.size()) throw FormatError("size index " + std::to_string(size) + " unknown", size_at);
        o.size_name = spec.sizes[size].name;
        o.half_extent = spec.sizes[size].half_extent;
        o.location.x = r.f32();
        o.location.y = r.f32();
        o.location.z = r.f32();
        o.rotation = r.u16() / 100.0;
    }
    g.relations.resize(n_relations);
    for (auto& rel : g.relations) {
        r.need(kCompactRelationBytes, "relation", expected);
        rel.relation_type = r.u8();
        rel.subject = r.u8();
        rel.object = r.u8();
    }
    if (r.pos() != r.size()) {
        throw FormatError("trailing bytes after SPG1 payload of " + std::to_string(expected) + " bytes", r.pos());
    }
    return g;
}

} // namespace saog
