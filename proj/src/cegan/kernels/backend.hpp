#pragma once

namespace cegan::kernels {

enum class Backend { scalar = 0, avx2 = 1, neon = 2 };

// Chosen once at first use: CEGAN_KERNELS env override (scalar|avx2|neon),
// otherwise the best instruction set the running CPU supports.
Backend active_backend();

// Forces a backend; throws ConfigError if it is not available on this host.
void set_backend(Backend b);

bool backend_available(Backend b);

const char* backend_name(Backend b);

}  // namespace cegan::kernels
