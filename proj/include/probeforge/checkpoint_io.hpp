#pragma once

#include <functional>
#include <string>

#include "probeforge/model.hpp"

namespace probeforge {

// Binary checkpoint layout:
//   bytes 0..7   magic "TPROBE01"
//   bytes 8..11  little-endian u32 manifest byte length
//   manifest     UTF-8 JSON {config, tensors:[{name,dtype,shape,offset,length}]}
//   payload      concatenated row-major little-endian f32 blobs
// Offsets and lengths are in bytes, relative to the start of the payload
// region (which begins right after the manifest). save->load->save is
// byte-identical.
//
// Load failures raise distinct errors (documented in the README):
//   FormatError "checkpoint: bad magic ..."
//   FormatError "checkpoint: manifest length ..."
//   ShapeError  "checkpoint: tensor shape ..."   (names the tensor)
//   FormatError "checkpoint: tensor offset ..."  (names the tensor)
//   FormatError "checkpoint: truncated payload ..."

inline constexpr char kCheckpointMagic[9] = "TPROBE01";

std::string serialize_checkpoint(const Checkpoint& ckpt);
Checkpoint deserialize_checkpoint(const std::string& bytes);

void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

// Visits every tensor of a checkpoint in canonical manifest order.
void for_each_tensor(const Checkpoint& ckpt,
                     const std::function<void(const std::string&, const Tensor&)>& fn);
void for_each_tensor(Checkpoint& ckpt,
                     const std::function<void(const std::string&, Tensor&)>& fn);

}  // namespace probeforge
