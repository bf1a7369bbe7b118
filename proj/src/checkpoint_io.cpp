#include "probeforge/checkpoint_io.hpp"

#include <cstring>
#include <map>

#include <nlohmann/json.hpp>

#include "probeforge/errors.hpp"
#include "probeforge/util.hpp"

namespace probeforge {

using nlohmann::json;

namespace {

json config_to_json(const ModelConfig& cfg) {
    return json{{"n_layers", cfg.n_layers},
                {"n_heads", cfg.n_heads},
                {"d_model", cfg.d_model},
                {"d_head", cfg.d_head},
                {"d_ffn", cfg.d_ffn},
                {"vocab_size", cfg.vocab_size},
                {"rope_base", cfg.rope_base},
                {"activation", activation_name(cfg.activation)},
                {"use_norm", cfg.use_norm},
                {"max_seq_len", cfg.max_seq_len}};
}

ModelConfig config_from_json(const json& j) {
    ModelConfig cfg;
    try {
        cfg.n_layers = j.at("n_layers").get<std::int64_t>();
        cfg.n_heads = j.at("n_heads").get<std::int64_t>();
        cfg.d_model = j.at("d_model").get<std::int64_t>();
        cfg.d_head = j.at("d_head").get<std::int64_t>();
        cfg.d_ffn = j.at("d_ffn").get<std::int64_t>();
        cfg.vocab_size = j.at("vocab_size").get<std::int64_t>();
        cfg.rope_base = j.at("rope_base").get<double>();
        cfg.activation = activation_from_name(j.at("activation").get<std::string>());
        cfg.use_norm = j.at("use_norm").get<bool>();
        cfg.max_seq_len = j.at("max_seq_len").get<std::int64_t>();
    } catch (const json::exception& e) {
        throw FormatError(std::string("checkpoint: manifest config invalid: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

void append_le_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint32_t read_le_u32(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

// f32 payload bytes are written little-endian; on the (little-endian)
// platforms this tool targets that is a straight memcpy.
void append_f32_le(std::string& out, const std::vector<float>& values) {
    static_assert(sizeof(float) == 4);
    const std::size_t start = out.size();
    out.resize(start + values.size() * 4);
    std::memcpy(out.data() + start, values.data(), values.size() * 4);
}

}  // namespace

void for_each_tensor(Checkpoint& ckpt,
                     const std::function<void(const std::string&, Tensor&)>& fn) {
    fn("embed.tok", ckpt.token_embedding);
    for (std::size_t l = 0; l < ckpt.layers.size(); ++l) {
        const std::string p = "layer." + std::to_string(l) + ".";
        LayerWeights& w = ckpt.layers[l];
        fn(p + "attn.q", w.q_proj);
        fn(p + "attn.k", w.k_proj);
        fn(p + "attn.v", w.v_proj);
        fn(p + "attn.o", w.o_proj);
        fn(p + "ffn.in", w.ffn_in);
        fn(p + "ffn.out", w.ffn_out);
        if (w.norm_attn) fn(p + "norm.attn", *w.norm_attn);
        if (w.norm_ffn) fn(p + "norm.ffn", *w.norm_ffn);
    }
    if (ckpt.final_norm) fn("final.norm", *ckpt.final_norm);
    fn("head.out", ckpt.output_head);
}

void for_each_tensor(const Checkpoint& ckpt,
                     const std::function<void(const std::string&, const Tensor&)>& fn) {
    for_each_tensor(const_cast<Checkpoint&>(ckpt),
                    [&fn](const std::string& name, Tensor& t) { fn(name, t); });
}

std::string serialize_checkpoint(const Checkpoint& ckpt) {
    ckpt.validate();

    json tensors = json::array();
    std::string payload;
    for_each_tensor(ckpt, [&](const std::string& name, const Tensor& t) {
        json entry;
        entry["name"] = name;
        entry["dtype"] = "f32";
        entry["shape"] = t.shape;
        entry["offset"] = payload.size();
        entry["length"] = t.data.size() * 4;
        tensors.push_back(entry);
        append_f32_le(payload, t.data);
    });

    json manifest;
    manifest["config"] = config_to_json(ckpt.config);
    manifest["tensors"] = tensors;
    const std::string manifest_str = manifest.dump();

    std::string out;
    out.reserve(12 + manifest_str.size() + payload.size());
    out.append(kCheckpointMagic, 8);
    append_le_u32(out, static_cast<std::uint32_t>(manifest_str.size()));
    out += manifest_str;
    out += payload;
    return out;
}

Checkpoint deserialize_checkpoint(const std::string& bytes) {
    if (bytes.size() < 12 || std::memcmp(bytes.data(), kCheckpointMagic, 8) != 0)
        throw FormatError("checkpoint: bad magic (expected TPROBE01)");

    const std::uint32_t manifest_len =
        read_le_u32(reinterpret_cast<const unsigned char*>(bytes.data() + 8));
    if (static_cast<std::size_t>(manifest_len) > bytes.size() - 12)
        throw FormatError("checkpoint: manifest length " + std::to_string(manifest_len) +
                          " exceeds file size");

    json manifest;
    try {
        manifest = json::parse(bytes.begin() + 12, bytes.begin() + 12 + manifest_len);
    } catch (const json::exception& e) {
        throw FormatError(std::string("checkpoint: manifest length or content invalid: ") + e.what());
    }
    if (!manifest.contains("config") || !manifest.contains("tensors"))
        throw FormatError("checkpoint: manifest missing config or tensors");

    const ModelConfig cfg = config_from_json(manifest["config"]);
    Checkpoint ckpt = zero_checkpoint(cfg);

    const std::size_t payload_start = 12 + manifest_len;
    const std::size_t payload_size = bytes.size() - payload_start;

    // index manifest entries by name
    struct Entry {
        std::vector<std::int64_t> shape;
        std::size_t offset = 0;
        std::size_t length = 0;
    };
    std::map<std::string, Entry> entries;
    for (const json& e : manifest["tensors"]) {
        Entry entry;
        std::string name;
        try {
            name = e.at("name").get<std::string>();
            if (e.at("dtype").get<std::string>() != "f32")
                throw FormatError("checkpoint: unsupported dtype for tensor " + name);
            entry.shape = e.at("shape").get<std::vector<std::int64_t>>();
            entry.offset = e.at("offset").get<std::size_t>();
            entry.length = e.at("length").get<std::size_t>();
        } catch (const json::exception& ex) {
            throw FormatError(std::string("checkpoint: malformed tensor entry: ") + ex.what());
        }
        entries[name] = std::move(entry);
    }

    std::size_t consumed = 0;
    for_each_tensor(ckpt, [&](const std::string& name, Tensor& t) {
        auto it = entries.find(name);
        if (it == entries.end())
            throw FormatError("checkpoint: manifest is missing tensor " + name);
        const Entry& e = it->second;
        if (e.shape != t.shape) {
            Tensor probe;
            probe.shape = e.shape;
            throw ShapeError("checkpoint: tensor shape mismatch for " + name + ": manifest says " +
                             probe.shape_str() + ", config implies " + t.shape_str());
        }
        if (e.length != t.data.size() * 4)
            throw ShapeError("checkpoint: tensor shape mismatch for " + name +
                             ": payload length " + std::to_string(e.length) +
                             " does not match shape " + t.shape_str());
        if (e.offset > payload_size || e.offset + e.length < e.offset)
            throw FormatError("checkpoint: tensor offset out of range for " + name);
        if (e.offset + e.length > payload_size)
            throw FormatError("checkpoint: truncated payload while reading " + name + " (need " +
                              std::to_string(e.offset + e.length) + " bytes, have " +
                              std::to_string(payload_size) + ")");
        std::memcpy(t.data.data(), bytes.data() + payload_start + e.offset, e.length);
        consumed += 1;
    });
    if (consumed != entries.size())
        throw FormatError("checkpoint: manifest lists " + std::to_string(entries.size()) +
                          " tensors, expected " + std::to_string(consumed));

    ckpt.validate();
    return ckpt;
}

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
    util::atomic_write_file(path, serialize_checkpoint(ckpt));
}

Checkpoint load_checkpoint(const std::string& path) {
    return deserialize_checkpoint(util::read_file(path));
}

}  // namespace probeforge
