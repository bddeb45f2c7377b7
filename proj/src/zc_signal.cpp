#include "wakeup/zc_signal.hpp"

namespace wakeup {

std::string to_string(ShiftConvention c)
{
    return c == ShiftConvention::AsPrinted ? "as_printed" : "cyclic_shift";
}

ShiftConvention shift_convention_from_string(const std::string& s)
{
    if (s == "as_printed")
        return ShiftConvention::AsPrinted;
    if (s == "cyclic_shift")
        return ShiftConvention::CyclicShift;
    throw InvalidParameters("unknown shift convention: " + s);
}

void PdwchGroupConfig::validate() const
{
    require(K > 0 && K % 2 == 1, "K must be odd and positive");
    require(root >= 1 && root < K && std::gcd(root, K) == 1, "root must be coprime with K and below it");
    require(K_cs >= 1 && K_cs <= K, "K_cs out of range");
    require(M >= 1 && M <= max_devices(), "M must not exceed floor(K/K_cs) - 1");
    require(N_g >= 0, "N_g must be non-negative");
}

} // namespace wakeup
