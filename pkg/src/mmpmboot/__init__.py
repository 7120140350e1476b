"""LWE functional bootstrapping with polynomial-vector test vectors."""

from .bench import compare_schemes, key_size_report, mmpm_explore, run_experiment
from .bootstrap import (
    LookUpTable,
    blind_rotate_mmpm,
    blind_rotate_tfhe,
    boot_general,
    boot_mmpm,
    boot_tfhe,
    extract_msb,
    functional_bootstrap,
    keygen,
)
from .lattice import (
    DomainError,
    LweCiphertext,
    LweSecret,
    RgswCiphertext,
    RingSecret,
    RlweCiphertext,
    lwe_decrypt,
    lwe_encrypt,
)
from .mmpm import Mmpm, is_transitive, normal_form, orbit_count, order, parse_mmpm, phi
from .noise import (
    check_decryptable_bound,
    choose_r,
    var_bootstrap_output,
    var_cmux,
    var_external_product,
    var_modswitch,
)
from .params import PRESETS, ParameterSet, get_preset
from .ring import ParameterError, RingElement, count_ring_mults

__version__ = "0.1.0"
