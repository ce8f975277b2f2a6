# SPDX-License-Identifier: Apache-2.0
"""Edge-side hybrid homomorphic encryption toolkit.

Thin re-export of the native module: structured prime search, RNS-CKKS
encode/encrypt, the Rubato stream cipher, the accelerator timing model, and
the near-network latency analysis.
"""

from _hhekit import (  # noqa: F401
    CkksCiphertext,
    CkksContext,
    CkksKeys,
    CkksPlaintext,
    Mode,
    PrimeSpec,
    barrett_reduce,
    ckks_decode,
    ckks_decrypt,
    ckks_encode,
    ckks_encrypt,
    ckks_keygen,
    compute_delta,
    decapsulate,
    encapsulate,
    ens,
    find_rns_primes,
    is_prime_u64,
    mod_add,
    mod_mul,
    mod_sub,
    ntt_negacyclic_mul,
    rubato_derive_key,
    rubato_keystream,
    rubato_params,
    rubato_round_constants,
    rubato_se_decrypt,
    rubato_se_encrypt,
    select_mode,
    shake128,
    simulate_ckks,
    simulate_rubato,
    speedup_sweep,
    standalone_latency,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
