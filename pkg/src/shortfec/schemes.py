"""
Coding schemes: encoder/decoder bundles satisfying the simulation
harness surface (n, k, encode_batch, decode_batch).

Every scheme here is linear, so encoding is one generator-matrix
product; the generator is built once by encoding unit vectors where no
explicit matrix exists (tail-biting and polar encoders).

The registry at the bottom maps scheme ids to factories taking a plain
parameter dict; it is the single source of schemes for the CLI.
"""

from __future__ import annotations

import numpy as np

from . import convolutional as conv
from . import polar as polar_mod
from .codes import LinearCode, ebch, golay_24_12
from .crc_tbcc import (
    CRC7,
    CrcCode,
    CrcTbccCode,
    FlipDecoderConfig,
    _flip_batch,
    crc_remainder_matrix,
)
from .ldpc import BpConfig, BpDecoder, BpOsdDecoder, SparseParityCheck, load_builtin
from .osd import OsdConfig, osd_decode_batch


class _LinearScheme:
    """Base: linear encoding via a cached generator matrix."""

    def __init__(self, name: str, gmat: np.ndarray):
        self.name = name
        self.gmat = np.ascontiguousarray(gmat, dtype=np.uint8)
        self.k, self.n = self.gmat.shape

    def encode_batch(self, msgs) -> np.ndarray:
        msgs = np.asarray(msgs, dtype=np.uint8)
        return (msgs.astype(np.uint32) @ self.gmat.astype(np.uint32) % 2).astype(
            np.uint8
        )


class UncodedScheme(_LinearScheme):
    """Identity code; hard decisions on the channel LLRs."""

    def __init__(self, k: int = 1):
        super().__init__(f"uncoded(k={k})", np.eye(k, dtype=np.uint8))

    def decode_batch(self, llrs, aux):
        msgs = (np.asarray(llrs) < 0).astype(np.uint8)
        return msgs, np.zeros(llrs.shape[0], dtype=bool)


class OsdScheme(_LinearScheme):
    """Any linear block code under order-t OSD (complete decoder)."""

    def __init__(self, code: LinearCode, cfg: OsdConfig, name: str | None = None):
        super().__init__(name or f"osd(t={cfg.order}) {code.name}", code.G)
        self.code = code
        self.cfg = cfg

    def decode_batch(self, llrs, aux):
        cw = osd_decode_batch(self.code, llrs, self.cfg, rho=aux.rho)
        msgs = self.code.message_from_codeword(cw)
        return msgs, np.zeros(llrs.shape[0], dtype=bool)


def _generator_by_probing(encode_fn, k: int) -> np.ndarray:
    rows = []
    for i in range(k):
        e = np.zeros(k, dtype=np.uint8)
        e[i] = 1
        rows.append(encode_fn(e))
    return np.asarray(rows, dtype=np.uint8)


class TbccWavaScheme(_LinearScheme):
    """Tail-biting convolutional code under wrap-around Viterbi."""

    def __init__(self, g1: str, g2: str, k: int, max_iters: int = 4):
        self.cc = conv.ConvCode.from_octal(g1, g2)
        self.trellis = conv.build_trellis(self.cc)
        self.max_iters = max_iters
        gmat = _generator_by_probing(lambda u: conv.tb_encode(self.cc, u), k)
        super().__init__(f"tbcc-wava[{g1},{g2}] (n={2 * k},k={k})", gmat)

    def decode_batch(self, llrs, aux):
        llrs = np.asarray(llrs, dtype=np.float64)
        B = llrs.shape[0]
        msgs = np.empty((B, self.k), dtype=np.uint8)
        detected = np.empty(B, dtype=bool)
        for f in range(B):
            res = conv.wava_decode(
                self.cc, llrs[f], max_iters=self.max_iters, trellis=self.trellis
            )
            msgs[f] = res.message
            detected[f] = res.detected_failure
        return msgs, detected


class CrcTbccFlipScheme(_LinearScheme):
    """CRC-16/punctured-TBCC with the weak-position flip decoder."""

    def __init__(self, cfg: FlipDecoderConfig, code: CrcTbccCode | None = None):
        self.code = code or CrcTbccCode.standard()
        self.cfg = cfg
        self.trellis = conv.build_trellis(self.code.cc)
        self._keep_idx = np.nonzero(self.code.pattern.mask(self.code.mother_n))[0]
        # message bits -> CRC remainder bits, for vectorized state recovery
        rdeg = self.code.crc.degree
        full = crc_remainder_matrix(self.code.crc, self.code.k + rdeg)
        self._crc_mat = full[: self.code.k]
        gmat = _generator_by_probing(self.code.encode, self.code.k)
        state = "known" if cfg.known_state else "unknown"
        super().__init__(
            f"crc-tbcc-flip(maxweak={cfg.max_weak},{state})", gmat
        )
        # register packs the last m input bits, newest in the top bit:
        # word[-m + q] carries weight 2^q
        self._state_weights = (1 << np.arange(self.code.cc.m)).astype(np.int64)

    def _true_states(self, msgs: np.ndarray) -> np.ndarray:
        crc_bits = (
            msgs.astype(np.uint32) @ self._crc_mat.astype(np.uint32) % 2
        ).astype(np.uint8)
        words = np.concatenate([msgs, crc_bits], axis=1)
        tail = words[:, -self.code.cc.m:]
        return tail.astype(np.int64) @ self._state_weights

    def decode_batch(self, llrs, aux):
        llrs = np.ascontiguousarray(llrs, dtype=np.float64)
        B = llrs.shape[0]
        if self.cfg.known_state:
            states = self._true_states(np.asarray(aux.messages, dtype=np.uint8))
        else:
            states = np.full(B, -1, dtype=np.int64)
        words, passed, _ = _flip_batch(
            llrs,
            self._keep_idx,
            self.code.mother_n,
            self.trellis.out_bits,
            self.trellis.next_state,
            self.trellis.m,
            np.int64(self.code.crc.poly),
            np.int64(self.code.crc.degree),
            self.cfg.max_weak,
            self.cfg.strong_one,
            self.cfg.strong_zero,
            states,
            self.cfg.wrap_passes,
        )
        return words[:, : self.code.k], ~passed


class PolarSclScheme(_LinearScheme):
    """Polar code under SC list decoding, optionally CRC-aided or genie."""

    def __init__(
        self,
        n: int,
        payload_k: int,
        design_snr_db: float,
        list_size: int,
        crc_bits: int = 0,
        genie: bool = False,
        exact: bool = True,
    ):
        if crc_bits not in (0, 7):
            raise ValueError("only CRC-7 concatenation is configured")
        if genie and crc_bits:
            raise ValueError("genie mode applies to the plain polar code")
        inner_k = payload_k + crc_bits
        self.design = polar_mod.ga_design(n, inner_k, design_snr_db)
        self.list_size = list_size
        self.exact = exact
        self.genie = genie
        self.crc = CrcCode(CRC7) if crc_bits else None
        if self.crc is not None:
            self._crc_mat = crc_remainder_matrix(self.crc, inner_k)[:payload_k]

        info = self.design.info_set

        def encode_fn(u):
            if self.crc is not None:
                crc_tail = (
                    u.astype(np.uint32) @ self._crc_mat.astype(np.uint32) % 2
                ).astype(np.uint8)
                u = np.concatenate([u, crc_tail])
            full = np.zeros(n, dtype=np.uint8)
            full[info] = u
            return polar_mod.polar_transform(full)

        gmat = _generator_by_probing(encode_fn, payload_k)
        tag = f"polar-scl(n={n},k={payload_k},L={list_size}"
        if crc_bits:
            tag += ",crc7"
        if genie:
            tag += ",genie"
        super().__init__(tag + ")", gmat)

    def decode_batch(self, llrs, aux):
        llrs = np.ascontiguousarray(llrs, dtype=np.float64)
        B = llrs.shape[0]
        paths, pms, _ = polar_mod._scl_batch(
            llrs, self.design.frozen, self.list_size, self.exact
        )
        info = self.design.info_set
        msgs_all = paths[:, :, info]  # (B, P, inner_k)
        detected = np.zeros(B, dtype=bool)

        if self.crc is not None:
            rmat = crc_remainder_matrix(self.crc, self.design.k)
            synd = (
                msgs_all.astype(np.uint32) @ rmat.astype(np.uint32) % 2
            ).any(axis=2)
            passing = ~synd
            best = np.argmin(np.where(passing, pms, np.inf), axis=1)
            none_pass = ~passing.any(axis=1)
            best[none_pass] = np.argmin(pms[none_pass], axis=1)
            detected = none_pass
            out = msgs_all[np.arange(B), best][:, : self.k]
            return out.astype(np.uint8), detected

        best = np.argmin(pms, axis=1)
        out = msgs_all[np.arange(B), best].astype(np.uint8)
        if self.genie:
            true_msgs = np.asarray(aux.messages, dtype=np.uint8)
            forced = np.zeros((B, self.design.n), dtype=np.int64)
            forced[:, info] = true_msgs
            pm_true = polar_mod._forced_pm_batch(
                llrs, self.design.frozen, self.exact, forced
            )
            better = pm_true < pms[np.arange(B), best]
            out[better] = true_msgs[better]
        return out, detected


class LdpcBpScheme(_LinearScheme):
    """LDPC code under flooding sum-product decoding."""

    def __init__(self, H: SparseParityCheck, max_iters: int = 50, name_suffix=""):
        self.decoder = BpDecoder(H, BpConfig(max_iters))
        from .codes import derive_generator

        G = derive_generator(H.to_dense())
        self.code = LinearCode.from_generator(G)
        super().__init__(f"ldpc-bp(iters={max_iters}){name_suffix}", G)

    def decode_batch(self, llrs, aux):
        hard, fail, _ = self.decoder.decode_batch(llrs)
        msgs = self.code.message_from_codeword(hard)
        return msgs, fail


class LdpcBpOsdScheme(_LinearScheme):
    """LDPC under BP with order-t OSD applied on BP failures."""

    def __init__(
        self,
        H: SparseParityCheck,
        max_iters: int = 50,
        order: int = 4,
        use_bp_llrs: bool = False,
    ):
        from .codes import derive_generator

        G = derive_generator(H.to_dense())
        code = LinearCode.from_generator(G)
        self.decoder = BpOsdDecoder(
            H,
            code=code,
            bp_cfg=BpConfig(max_iters),
            osd_cfg=OsdConfig(order=order),
            use_bp_llrs=use_bp_llrs,
        )
        self.code = code
        super().__init__(f"ldpc-bp-osd(iters={max_iters},t={order})", G)

    def decode_batch(self, llrs, aux):
        cw, detected = self.decoder.decode_batch(llrs, rho=aux.rho)
        msgs = self.code.message_from_codeword(cw)
        return msgs, detected


# ----------------------------------------------------------------------
# registry
# ----------------------------------------------------------------------

def _build_uncoded(p):
    return UncodedScheme(k=int(p.get("k", 1)))


def _build_ebch_osd(p):
    m = int(p.get("m", 7))
    k = int(p.get("k", 64))
    d_min = p.get("d_min", 22 if (m, k) == (7, 64) else None)
    code = ebch(m, k, d_min=d_min)
    return OsdScheme(code, OsdConfig(order=int(p.get("t", 4)), d_min=d_min))


def _build_golay_osd(p):
    code = golay_24_12()
    d_min = p.get("d_min", 8)
    return OsdScheme(code, OsdConfig(order=int(p.get("t", 2)), d_min=d_min))


def _build_tbcc_wava(p):
    return TbccWavaScheme(
        g1=str(p.get("g1", "515")),
        g2=str(p.get("g2", "677")),
        k=int(p.get("k", 64)),
        max_iters=int(p.get("iters", 4)),
    )


def _build_crc_tbcc(p):
    cfg = FlipDecoderConfig(
        max_weak=int(p.get("max_weak", 10)),
        known_state=bool(p.get("known_state", False)),
    )
    return CrcTbccFlipScheme(cfg)


def _build_polar(p):
    return PolarSclScheme(
        n=int(p.get("n", 128)),
        payload_k=int(p.get("k", 64)),
        design_snr_db=float(p.get("design_snr_db", 4.5)),
        list_size=int(p.get("list_size", 8)),
        crc_bits=int(p.get("crc_bits", 0)),
        genie=bool(p.get("genie", False)),
    )


def _load_parity(p) -> SparseParityCheck:
    if "alist" in p:
        from .ldpc import parse_alist

        with open(p["alist"], "r", encoding="ascii") as fh:
            return parse_alist(fh.read())
    return load_builtin(p.get("builtin", "peg_128_64_rd3.alist"))


def _build_ldpc_bp(p):
    return LdpcBpScheme(_load_parity(p), max_iters=int(p.get("max_iters", 50)))


def _build_ldpc_bp_osd(p):
    return LdpcBpOsdScheme(
        _load_parity(p),
        max_iters=int(p.get("max_iters", 50)),
        order=int(p.get("t", 4)),
    )


REGISTRY = {
    "uncoded": _build_uncoded,
    "ebch-osd": _build_ebch_osd,
    "golay-osd": _build_golay_osd,
    "tbcc-wava": _build_tbcc_wava,
    "crc-tbcc-flip": _build_crc_tbcc,
    "polar-scl": _build_polar,
    "ldpc-bp": _build_ldpc_bp,
    "ldpc-bp-osd": _build_ldpc_bp_osd,
}


def build_scheme(scheme_id: str, params: dict):
    """Instantiate a registered scheme from its id and parameter dict."""
    if scheme_id not in REGISTRY:
        raise KeyError(
            f"unknown scheme '{scheme_id}'; known: {sorted(REGISTRY)}"
        )
    return REGISTRY[scheme_id](params or {})
