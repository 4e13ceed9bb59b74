#include "semtok/durcodec.hpp"

#include <string>

#include "semtok/error.hpp"

namespace semtok {

TokenStream compress(std::span<const std::uint32_t> ids,
                     const DurCodecConfig& cfg) {
  TokenStream out;
  std::size_t i = 0;
  while (i < ids.size()) {
    const std::uint32_t id = ids[i];
    if (id >= cfg.sound_count) {
      throw Error("sound id " + std::to_string(id) + " out of range [0, " +
                  std::to_string(cfg.sound_count) + ") at position " +
                  std::to_string(i));
    }
    std::size_t j = i;
    while (j < ids.size() && ids[j] == id) ++j;
    std::size_t run = j - i;
    while (run > cfg.max_run) {
      out.groups.push_back({id, cfg.max_run});
      run -= cfg.max_run;
    }
    out.groups.push_back({id, static_cast<std::uint32_t>(run)});
    i = j;
  }
  return out;
}

std::vector<std::uint32_t> decompress(const TokenStream& stream,
                                      const DurCodecConfig& cfg) {
  std::vector<std::uint32_t> out;
  for (std::size_t g = 0; g < stream.groups.size(); ++g) {
    const Group& grp = stream.groups[g];
    if (grp.run < 1 || grp.run > cfg.max_run) {
      throw Error("run length " + std::to_string(grp.run) +
                  " outside [1, " + std::to_string(cfg.max_run) +
                  "] in group " + std::to_string(g));
    }
    out.insert(out.end(), grp.run, grp.sound);
  }
  return out;
}

std::size_t emitted_token_count(const TokenStream& stream) {
  std::size_t n = 0;
  for (const Group& g : stream.groups) n += (g.run >= 2) ? 2 : 1;
  return n;
}

double compression_ratio(const TokenStream& stream, std::size_t original_len) {
  if (original_len == 0) throw Error("compression ratio of empty sequence");
  return static_cast<double>(emitted_token_count(stream)) /
         static_cast<double>(original_len);
}

}  // namespace semtok
