// Golden values computed by the independent oracles in tests/oracles/:
//   kdf_oracle.py      - SP 800-56A one-step KDF from hashlib primitives
//   keychain_oracle.py - epoch derivation via python-cryptography P-224
//   cf_oracle.py       - integer-Euclid expansions of mpmath values at
//                        512/640 digits (agreed prefixes only)
// Regenerate with: python3 tests/oracles/<script>.py

#ifndef OFSIM_TESTS_FIXTURES_HPP
#define OFSIM_TESTS_FIXTURES_HPP

#include <cstdint>
#include <string>
#include <vector>

namespace fixtures {

// ---------------------------------------------------------------------------
// kdf_oracle.py

inline const std::string kKdfZeroUpdate32 =
    "8e060cc4ea4212639614d3da13ddcc18683e684571062eb50880b0eaa589babe";
inline const std::string kKdfZeroDiversify32 =
    "8e56489641b08cec2fff7ec37b7b1d9272bb8e350321b723127f9e9b97e3748a";
inline const std::string kKdfZeroUpdate80 =
    "8e060cc4ea4212639614d3da13ddcc18683e684571062eb50880b0eaa589babe"
    "fdb74b4f398ab7a9636cd4faa3a3bdb6a0628b21ade3afc6c2859e2b16f1e9cc"
    "43e834afcb62c0b471f3b04ab72822a4";
inline const std::string kRatchet10Zero =
    "a7a394f882c7ef1cc16daa1e56e9239a365481612cafe4582884e62ee923d1f9";
inline const std::string kDiversifyAbU =
    "7515f092646f1a1d235611915274f692606c45afbf8bb84b221cb1a6";
inline const std::string kDiversifyAbV =
    "482b08cd6e66d47b281d953443c17edd444f736d447a9e27a691d600";

// ---------------------------------------------------------------------------
// keychain_oracle.py

inline const std::string kMasterText =
    "d=1f2e3d4c5b6a798800112233445566778899aabbccddee0102030405\n"
    "P=0256d4afe7f3f57c416d87c77babf92f755c46184fc13fb4143e733a31\n"
    "sk0=000102030405060708090a0b0c0d0e0f101112131415161718191a1b1c1d1e1f\n"
    "created_at=0\n";

struct EpochGolden {
  std::uint64_t i;
  std::string u, v, d_i, P_i, index;
};

inline const std::vector<EpochGolden> kEpochGoldens = {
    {0,
     "464eba69c5325534c891117bc2dc3c31fa986878b2408e2a8f71cbe5",
     "87dd3a5e1f3ae6758033b6ff49f27d423bda491f2006942f85757277",
     "b83b79184bdec7a48fde8a4783c2742289587c88a19c45b9a0c063fc",
     "02a9362f058a070e4dcb1918e45182287d717f832e62accc4333a54372",
     "40e60323822ba85d16e6d09bd8e2fcac3220bac837965f1e35ef7bfd77e65920"},
    {1,
     "fbc2a1880b9bbb475d9cd2e6dd2bae2ff104755dfd7e9c59b11f291e",
     "044941e1e5a1b30667298f87a81c0780e1d7c53026b5b39491c1f3e8",
     "b02a0764e4479dff748f4a3fc242eff961a4169b76afd3ce9eba708e",
     "0220c846738dba13b005a1da2c93d2352d03cfa8982728d6cc1eeba98c",
     "173a0dffa63dd0176816e2d7e3f16078ff441831da64e07f72a62ca5cc1e7bdb"},
    {7,
     "4678d3329ed879f52075489233e19ab73a31b5ad0d37d08e4a650b9f",
     "436b3ddfd1d00e0bbf89c480a6c7892a58ebef30b29919241601b499",
     "b043ee05773abf1ed39a4a8c109ccbe40246255d382a8fb6ab852d77",
     "02093d46432f52ed31f08596e0807c52c8281fd409f1f7c1ed9c5e0942",
     "b4743db72494601d4a206bceab911dc10449c60af29f838e293cc9841b6ff171"},
};

// ---------------------------------------------------------------------------
// cf_oracle.py

inline const std::vector<std::uint64_t> kCbrtLog10First9 = {1, 3,   8, 3, 12,
                                                            1, 332, 2, 95};
inline const std::vector<std::uint64_t> kCbrtLog2First20 = {
    0, 1, 7, 1, 2, 3, 1, 1, 7, 1, 8, 2, 2, 1, 1, 43, 4, 1, 401, 2};
inline const std::vector<std::uint64_t> kCbrtLog7First30 = {
    1, 4, 40, 3, 3, 1, 3, 1, 1, 98, 1, 1, 3, 2, 9,
    1, 2, 5,  1, 18, 1, 1, 165, 1, 2, 1, 3, 1, 3, 1};
inline const std::vector<std::uint64_t> kCbrtLogBigFirst50 = {
    4, 2,  5,   1, 3, 3, 1, 1, 8, 1, 2,  1, 1, 1,  12, 1, 2, 1,  3, 5,
    2, 10, 155, 2, 1, 1, 4, 1, 8, 1, 13, 1, 4, 15, 1,  2, 2, 17, 2, 31,
    2, 22, 1,   2, 2, 1, 4, 1, 30, 6};
inline const std::string kCbrtLog2Decimal80 =
    "0.8849970445005177187460509412633901613148316579812599861481583559798527988758549";

inline const std::string kFcKeyA =
    "0331c49ae75bce7807cdff22055d94ee9021fedbb5ab51c57526f011aa";
inline const std::string kFcKeyB =
    "036e31ee1dc137f81b056752e4deab1443a481033e9b4c93a3044f4f7a";
inline const std::uint64_t kFcNonce = 123456789;
inline const std::size_t kFcOffsetAB = 58;
inline const std::vector<std::uint64_t> kFcQuotientsAB = {7, 1, 1,  2, 190,
                                                          3, 1, 1, 13};
inline const std::size_t kFcOffsetBA = 20;
inline const std::vector<std::uint64_t> kFcQuotientsBA = {11, 3, 1,  19, 1,
                                                          1,  1, 43, 1};

}  // namespace fixtures

#endif
