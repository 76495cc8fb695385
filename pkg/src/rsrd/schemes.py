"""Named decoding schemes: which measure, source model and pattern set each uses.

Recognised names::

    BM  GMD  SED(l,f)  mBM-l(R)  mBM-HM74(R)  EO-l(R)
    mASD-2(R)  mASD-2a(R)  mASD-3(R)  m-b-ASD(R)

``(R)`` may be left off when only the R-D curve of a scheme is wanted.
"""

import logging
import re
from dataclasses import dataclass


from . import measures as ms
from . import patterns as pt
from .rdengine import factored_rd, rd_at_rate

log = logging.getLogger(__name__)

_STEEPEST = -50.0


class SchemeError(ValueError):
    pass


_ASD_TYPES = {
    "2a": (2, [(2, 0), (1, 1), (0, 0)]),
}

_PATTERNS = [
    ("bm", re.compile(r"^BM$")),
    ("gmd", re.compile(r"^GMD$")),
    ("sed", re.compile(r"^SED\((?P<l>\d+),(?P<f>\d+)\)$")),
    ("hm74", re.compile(r"^mBM-HM74(\((?P<R>\d+)\))?$")),
    ("mbm", re.compile(r"^mBM-(?P<l>\d+)(\((?P<R>\d+)\))?$")),
    ("eo", re.compile(r"^EO-(?P<l>\d+)(\((?P<R>\d+)\))?$")),
    ("basd", re.compile(r"^m-b-ASD(\((?P<R>\d+)\))?$")),
    ("asd", re.compile(r"^mASD-(?P<v>\d+a?)(\((?P<R>\d+)\))?$")),
]


@dataclass(frozen=True)
class Scheme:
    name: str
    family: str
    R: int | None = None
    l: int = 1
    f: int = 0
    span: int = 0
    m: int | None = None
    types: tuple | None = None

    @property
    def label(self):
        return self.name if self.R is None or "(" in self.name else f"{self.name}({self.R})"

    @property
    def bm_decodable(self):
        """True when trials run the real error-and-erasure BM decoder."""
        return self.family in ("bm", "gmd", "sed", "mbm", "eo", "hm74")

    @property
    def uses_rd(self):
        return self.family in ("mbm", "eo", "hm74", "asd", "basd")

    def measure(self, n, k):
        fam = self.family
        if fam in ("bm", "gmd", "sed"):
            return ms.conventional_measure(n, k)
        if fam == "mbm":
            return ms.mbm_measure(n, k, self.l)
        if fam in ("eo", "hm74"):
            return ms.error_only_measure(n, k, self.l)
        if fam == "basd":
            return ms.bitlevel_measure(n, k)
        return ms.asd_measure(n, k, self.m, self.types, name=self.name)

    def source(self, profile):
        if self.family == "basd":
            return profile.bit_source()
        src = profile.symbol_source(self.l)
        return src.restrict(7) if self.family == "hm74" else src

    def design(self, profile, n, k, rate=None):
        """The R-D point used to draw patterns (None for fixed-set schemes)."""
        if not self.uses_rd:
            return None
        R = self.R if rate is None else rate
        if R is None:
            raise SchemeError(f"scheme {self.name} needs a rate")
        if self.family == "hm74":
            R = R - 4
            if R < 0:
                raise SchemeError("mBM-HM74 needs R >= 4")
        src, dm = self.source(profile), self.measure(n, k)
        try:
            return rd_at_rate(src, dm, R)
        except ValueError:
            # more patterns than the source can use: take the low-distortion end
            top = factored_rd(src, dm, _STEEPEST)
            log.warning("%s: rate %s exceeds the curve maximum %.2f bits; using it",
                        self.label, R, top.rate)
            return top

    def pattern_set(self, n, k, design, rng, include_hd=True):
        dm = self.measure(n, k)
        fam = self.family
        if fam == "bm":
            return pt.PatternSet(pt.hd_pattern(n)[None, :], "BM", 0.0)
        if fam == "gmd":
            return pt.gmd_set(n, n - k + 1)
        if fam == "sed":
            return pt.sed_set(self.span, self.f, n)
        if fam == "hm74":
            return pt.covering_hybrid_set(pt.hamming74(), design, self.R, rng, dm, include_hd)
        return pt.random_set(design, self.R, rng, dm, include_hd)

    def error_pattern(self, frame, q):
        if self.family == "basd":
            return ms.extract_bit_error_pattern(frame.codeword, frame.received,
                                                frame.view.bit_sigma, q)
        return ms.extract_error_pattern(frame.codeword, frame.view, self.l)

    def check(self, n, k):
        """Raise SchemeError if the scheme cannot be used with an (n, k) code."""
        try:
            self.measure(n, k)
        except ValueError as exc:
            raise SchemeError(f"{self.label}: {exc}") from exc
        if self.family == "sed" and self.span > n:
            raise SchemeError(f"{self.label}: l exceeds n")
        if self.family == "gmd" and (n - k + 1) % 2 == 0:
            raise SchemeError("GMD needs an odd minimum distance")
        if self.family == "hm74" and (self.R is not None and self.R < 4 or n < 8):
            raise SchemeError(f"{self.label}: needs R >= 4 and n > 7")


def parse_scheme(text):
    text = text.strip().replace(" ", "")
    for fam, rx in _PATTERNS:
        mt = rx.match(text)
        if not mt:
            continue
        g = mt.groupdict()
        R = int(g["R"]) if g.get("R") is not None else None
        base = text.split("(")[0] if fam not in ("sed",) else text
        if fam == "bm":
            return Scheme("BM", fam, None)
        if fam == "gmd":
            return Scheme("GMD", fam, None)
        if fam == "sed":
            l, f = int(g["l"]), int(g["f"])
            if f > l:
                raise SchemeError(f"SED needs f <= l, got {text}")
            return Scheme(text, fam, None, f=f, span=l)
        if fam == "hm74":
            return Scheme(base, fam, R, l=2)
        if fam in ("mbm", "eo"):
            l = int(g["l"])
            if l < 1:
                raise SchemeError(f"{text}: l must be positive")
            return Scheme(base, fam, R, l=l)
        if fam == "basd":
            return Scheme(base, fam, R, l=1)
        v = g["v"]
        if v in _ASD_TYPES:
            m, types = _ASD_TYPES[v]
        elif v.isdigit() and int(v) >= 1:
            m = int(v)
            types = ms.allowable_types(m, m)
        else:
            raise SchemeError(f"unknown ASD variant {text}")
        return Scheme(base, fam, R, l=len(types[0]), m=m, types=tuple(map(tuple, types)))
    raise SchemeError(f"unrecognised scheme {text!r}")
