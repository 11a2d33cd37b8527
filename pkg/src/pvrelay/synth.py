"""Synthetic 3-phase current transients.

Closed-form stand-ins for electromagnetic simulation of a PV-connected line:

* faults: prefault load current plus a fault increment (gain, lag angle and a
  decaying DC offset chosen per fault location), zero-sequence injection for
  unbalanced ground faults and a small coupled perturbation on healthy phases;
* capacitor switching: capacitive current step plus a damped ring;
* load switching: amplitude step;
* high impedance faults: anti-parallel DC sources behind diodes with arc
  resistances re-drawn every 2 ms.

Every record is a pure function of ``(label, params, seed)``.  The steady
waveform depends on the sample index only through ``n mod M`` so it is
exactly periodic, which keeps cycle-to-cycle comparisons exact.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from . import kernels

FAULT_TYPES = ("ag", "ab", "ac", "abg", "acg", "abcg", "bg", "bcg", "bc", "cg")
LOCATIONS = ("f1", "f2", "f3", "f4", "f5", "f6", "f7", "f8")
KINDS = ("Fault", "CapacitorSwitch", "LoadSwitch", "HIF", "Steady")
PRIORITIES = ("P", "Q")
ZONES = ("backward", "internal", "forward")
PHASE_CLASSES = ("a", "b", "c", "ab", "bc", "ca", "abc")

_ZONE_OF = {"f1": "backward", "f2": "backward", "f3": "backward",
            "f4": "internal", "f5": "internal",
            "f6": "forward", "f7": "forward", "f8": "forward"}
_PHASE_CLASS_OF = {"ag": "a", "bg": "b", "cg": "c", "ab": "ab", "abg": "ab",
                   "bc": "bc", "bcg": "bc", "ac": "ca", "acg": "ca", "abcg": "abc"}


class SynthError(ValueError):
    """Invalid generator input."""


def zone_of(location: str) -> str:
    try:
        return _ZONE_OF[location]
    except KeyError:
        raise SynthError(f"unknown fault location {location!r}") from None


def phase_class_of(fault_type: str) -> str:
    try:
        return _PHASE_CLASS_OF[fault_type]
    except KeyError:
        raise SynthError(f"unknown fault type {fault_type!r}") from None


def faulted_phases(fault_type: str) -> tuple[int, ...]:
    phase_class_of(fault_type)
    return tuple(i for i, p in enumerate("abc") if p in fault_type)


@dataclass(frozen=True)
class EventLabel:
    kind: str
    fault_type: str = ""
    location: str = ""
    resistance_ohm: float = 0.0
    inception_angle_deg: float = 0.0
    priority: str = "P"

    def __post_init__(self):
        if self.kind not in KINDS:
            raise SynthError(f"unknown event kind {self.kind!r}")
        if self.priority not in PRIORITIES:
            raise SynthError(f"unknown priority {self.priority!r}")
        faulted = self.kind in ("Fault", "HIF")
        if faulted:
            phase_class_of(self.fault_type)
            zone_of(self.location)
        elif self.fault_type or self.location:
            raise SynthError(f"{self.kind} label cannot carry fault_type/location")

    @property
    def is_fault(self) -> bool:
        return self.kind in ("Fault", "HIF")

    @property
    def zone(self) -> Optional[str]:
        return zone_of(self.location) if self.is_fault else None

    @property
    def phase_class(self) -> Optional[str]:
        return phase_class_of(self.fault_type) if self.is_fault else None


@dataclass
class WaveformRecord:
    phase_a: np.ndarray
    phase_b: np.ndarray
    phase_c: np.ndarray
    label: EventLabel
    seed: int = 0
    sample_rate_hz: float = 7680.0
    base_freq_hz: float = 60.0
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.phase_a = np.asarray(self.phase_a, dtype=np.float64)
        self.phase_b = np.asarray(self.phase_b, dtype=np.float64)
        self.phase_c = np.asarray(self.phase_c, dtype=np.float64)
        n = self.phase_a.shape[0]
        if self.phase_b.shape != (n,) or self.phase_c.shape != (n,):
            raise SynthError("phase sequences must be 1-D and of equal length")
        ratio = self.sample_rate_hz / self.base_freq_hz
        if ratio <= 0 or abs(ratio - round(ratio)) > 1e-9:
            raise SynthError(
                f"sample rate {self.sample_rate_hz} Hz is not an integer multiple "
                f"of {self.base_freq_hz} Hz")

    @property
    def samples_per_cycle(self) -> int:
        return int(round(self.sample_rate_hz / self.base_freq_hz))

    @property
    def n_samples(self) -> int:
        return self.phase_a.shape[0]

    @property
    def currents(self) -> np.ndarray:
        """Samples as a ``(3, n)`` array (a, b, c)."""
        return np.vstack([self.phase_a, self.phase_b, self.phase_c])

    @property
    def inception_index(self) -> Optional[int]:
        v = self.meta.get("inception_index")
        return None if v in (None, "") else int(v)

    def with_currents(self, currents, **meta_updates) -> "WaveformRecord":
        meta = dict(self.meta)
        meta.update({k: str(v) for k, v in meta_updates.items()})
        return replace(self, phase_a=np.array(currents[0], dtype=np.float64),
                       phase_b=np.array(currents[1], dtype=np.float64),
                       phase_c=np.array(currents[2], dtype=np.float64), meta=meta)


def _default_gain():
    return {"f1": 5.0, "f2": 5.5, "f3": 6.0, "f4": 9.0,
            "f5": 8.0, "f6": 6.0, "f7": 5.0, "f8": 4.5}


def _default_rcoef():
    return {loc: 0.05 for loc in LOCATIONS}


def _default_lag():
    # fault-current lag behind the load current as seen by the relay CT;
    # backward faults are fed from the grid side and appear reversed
    return {"f1": 200.0, "f2": 200.0, "f3": 200.0, "f4": 75.0,
            "f5": 75.0, "f6": 40.0, "f7": 40.0, "f8": 40.0}


def _default_tau():
    return {"f1": 0.05, "f2": 0.05, "f3": 0.05, "f4": 0.03,
            "f5": 0.03, "f6": 0.015, "f7": 0.015, "f8": 0.015}


@dataclass
class SynthParams:
    """Generator constants.  All are modelling assumptions, not measurements."""

    sample_rate_hz: float = 7680.0
    base_freq_hz: float = 60.0
    record_cycles: int = 6
    pre_event_cycles: int = 2
    prefault_amplitude: float = 1.0
    # faults
    fault_current_gain: dict = field(default_factory=_default_gain)
    resistance_coeff: dict = field(default_factory=_default_rcoef)
    fault_lag_deg: dict = field(default_factory=_default_lag)
    dc_time_constant_s: dict = field(default_factory=_default_tau)
    dc_offset_fraction: float = 0.8
    q_priority_lag_deg: float = 10.0
    zero_seq_fraction: float = 0.3
    coupling_max: float = 0.02
    # switching
    switch_osc_freq_hz: float = 600.0
    switch_damping_s: float = 0.004
    cap_step_fraction: float = 0.12
    cap_ring_fraction: float = 0.6
    load_step_factors: tuple = (1.1, 1.2, 1.35, 1.5)
    # high impedance faults (kV, ohm, kA)
    hif_phase_peak_kv: float = 187.8
    hif_source_volts: tuple = (5.0, 4.0)
    hif_resistance_band: tuple = (50.0, 300.0)
    hif_redraw_s: float = 0.002
    hif_current_base_ka: float = 12.0
    hif_voltage_lead_deg: float = 20.0
    # scenario transforms
    noise_snr_db: Optional[float] = None
    ct_burden_ohm: Optional[float] = None

    def validate(self) -> "SynthParams":
        if self.sample_rate_hz <= 0 or self.base_freq_hz <= 0:
            raise SynthError("sample and base frequencies must be positive")
        m = self.sample_rate_hz / self.base_freq_hz
        if abs(m - round(m)) > 1e-9:
            raise SynthError("sample_rate_hz / base_freq_hz must be an integer")
        if self.record_cycles < self.pre_event_cycles + 2 or self.record_cycles < 4:
            raise SynthError("record_cycles must be >= 4 and leave 2 cycles after the event")
        if self.pre_event_cycles < 2:
            raise SynthError("pre_event_cycles must be >= 2")
        for name in ("fault_current_gain", "resistance_coeff", "dc_time_constant_s", "fault_lag_deg"):
            table = getattr(self, name)
            missing = [loc for loc in LOCATIONS if loc not in table]
            if missing:
                raise SynthError(f"{name} missing locations {missing}")
        if any(not v > 0 for v in self.fault_current_gain.values()):
            raise SynthError("fault gains must be positive")
        if any(not v > 0 for v in self.dc_time_constant_s.values()):
            raise SynthError("DC time constants must be positive")
        if any(v < 0 for v in self.resistance_coeff.values()):
            raise SynthError("resistance coefficients must be non-negative")
        if self.prefault_amplitude <= 0 or self.switch_damping_s <= 0:
            raise SynthError("amplitudes and time constants must be positive")
        vp, vn = self.hif_source_volts
        if vp < 0 or vn < 0:
            raise SynthError("HIF source voltages must be non-negative magnitudes")
        lo, hi = self.hif_resistance_band
        if not 0 < lo <= hi:
            raise SynthError("HIF resistance band must satisfy 0 < low <= high")
        return self

    @property
    def samples_per_cycle(self) -> int:
        return int(round(self.sample_rate_hz / self.base_freq_hz))

    @property
    def n_samples(self) -> int:
        return self.record_cycles * self.samples_per_cycle


def cosd(deg: float) -> float:
    """Cosine in degrees, exact at multiples of 90."""
    r = deg % 360.0
    exact = {0.0: 1.0, 90.0: 0.0, 180.0: -1.0, 270.0: 0.0}
    if r in exact:
        return exact[r]
    return math.cos(math.radians(r))


def _phase_grid(params: SynthParams):
    """Per-phase electrical angle (rad) of every sample, periodic in n mod M."""
    m = params.samples_per_cycle
    n = np.arange(params.n_samples)
    base = 2.0 * np.pi * (n % m) / m
    shifts = np.array([0.0, -2.0 * np.pi / 3.0, 2.0 * np.pi / 3.0])
    return base[None, :] + shifts[:, None]


def _steady(params: SynthParams) -> np.ndarray:
    return params.prefault_amplitude * np.sin(_phase_grid(params))


def _inception_index(params: SynthParams, angle_deg: float) -> int:
    if not 0.0 <= angle_deg < 360.0:
        raise SynthError(f"inception angle {angle_deg} outside [0, 360)")
    m = params.samples_per_cycle
    n0 = params.pre_event_cycles * m + int(round(angle_deg / 360.0 * m))
    if n0 >= params.n_samples:
        raise SynthError("inception lies beyond the record")
    return n0


def _record(currents, label, params, seed, n0) -> WaveformRecord:
    meta = {"sample_rate_hz": repr(float(params.sample_rate_hz)),
            "base_freq_hz": repr(float(params.base_freq_hz))}
    if n0 is not None:
        meta["inception_index"] = str(n0)
    return WaveformRecord(currents[0], currents[1], currents[2], label, int(seed),
                          float(params.sample_rate_hz), float(params.base_freq_hz), meta)


def synth_steady(params: Optional[SynthParams] = None, seed: int = 0) -> WaveformRecord:
    params = (params or SynthParams()).validate()
    return _record(_steady(params), EventLabel("Steady"), params, seed, None)


def effective_gain(label: EventLabel, params: SynthParams) -> float:
    loc = label.location
    return params.fault_current_gain[loc] / (1.0 + label.resistance_ohm * params.resistance_coeff[loc])


def synth_fault(label: EventLabel, params: Optional[SynthParams] = None, seed: int = 0) -> WaveformRecord:
    """Shunt fault record.

    Faulted phase ``k`` after inception carries
    ``A sin(th_k) + (g - 1) A sin(th_k - lag) + A_dc,k exp(-t / tau)``
    with ``g = gain_loc / (1 + R k_loc)`` and
    ``A_dc,k = dc_offset_fraction (g - 1) A cos(alpha_k)`` where ``alpha_k`` is
    the phase's point-on-wave at inception.  ``g = 1`` leaves the waveform
    untouched.
    """
    params = (params or SynthParams()).validate()
    if label.kind != "Fault":
        raise SynthError(f"synth_fault needs a Fault label, got {label.kind}")
    if label.resistance_ohm < 0:
        raise SynthError("fault resistance must be non-negative")
    phases = faulted_phases(label.fault_type)
    n0 = _inception_index(params, label.inception_angle_deg)
    rng = np.random.default_rng(seed)

    a = params.prefault_amplitude
    theta = _phase_grid(params)[:, n0:]
    out = _steady(params)
    g = effective_gain(label, params)
    lag = params.fault_lag_deg[label.location]
    if label.priority == "Q":
        lag += params.q_priority_lag_deg
    lag_rad = math.radians(lag)
    tau = params.dc_time_constant_s[label.location]
    t_rel = np.arange(out.shape[1] - n0) / params.sample_rate_hz
    decay = np.exp(-t_rel / tau)
    incr = g - 1.0
    # draw coupling factors for every phase so the stream does not depend on the fault type
    coupling = rng.uniform(0.0, params.coupling_max, size=3) * min(1.0, abs(incr))
    coupling_lag = rng.uniform(0.0, 2.0 * np.pi, size=3)

    for k in range(3):
        if k in phases:
            alpha_k = label.inception_angle_deg - 120.0 * k
            term = incr * a * np.sin(theta[k] - lag_rad)
            a_dc = params.dc_offset_fraction * incr * a * cosd(alpha_k)
            if a_dc != 0.0:
                term = term + a_dc * decay
            out[k, n0:] += term
        elif coupling[k] > 0.0:
            out[k, n0:] += coupling[k] * a * np.sin(theta[k] - coupling_lag[k])

    grounded = label.fault_type.endswith("g") and len(phases) < 3
    if grounded and params.zero_seq_fraction > 0.0 and incr != 0.0:
        ref = theta[phases[0]] - lag_rad
        i0 = params.zero_seq_fraction * incr * a * np.sin(ref)
        for k in phases:
            out[k, n0:] += i0
    return _record(out, label, params, seed, n0)


def _switch_freq(params: SynthParams, bus: str, generator: str, rng) -> float:
    bus_factor = {"bus4": 0.8, "bus8": 1.0, "bus9": 1.25}.get(bus, 1.0)
    gen_factor = 1.0 if generator == "connected" else 0.85
    f = params.switch_osc_freq_hz * bus_factor * gen_factor * (1.0 + rng.uniform(-0.05, 0.05))
    return float(min(900.0, max(300.0, f)))


def synth_switching(kind: str, angle_deg: float, params: Optional[SynthParams] = None,
                    seed: int = 0, *, rating: int = 1, bus: str = "bus8",
                    generator: str = "connected", priority: str = "P",
                    step_factor: Optional[float] = None,
                    ring_fraction: Optional[float] = None) -> WaveformRecord:
    """Capacitor or load switching record.

    Capacitor: leading current step plus
    ``ring A cos(alpha_k) exp(-t/d) sin(2 pi f_osc t)`` on every phase.
    Load: amplitude step by ``step_factor`` (taken from the rating when not
    given), no DC offset and no ring.
    """
    params = (params or SynthParams()).validate()
    if kind not in ("CapacitorSwitch", "LoadSwitch"):
        raise SynthError(f"unknown switching kind {kind!r}")
    if rating < 1:
        raise SynthError("rating index starts at 1")
    n0 = _inception_index(params, angle_deg)
    rng = np.random.default_rng(seed)
    a = params.prefault_amplitude
    out = _steady(params)
    theta = _phase_grid(params)[:, n0:]
    meta = {"bus": bus, "generator": generator, "rating": str(rating)}

    if kind == "LoadSwitch":
        if step_factor is None:
            factors = params.load_step_factors
            step_factor = factors[min(rating, len(factors)) - 1]
        if step_factor <= 0:
            raise SynthError("load step factor must be positive")
        if step_factor != 1.0:
            out[:, n0:] = step_factor * a * np.sin(theta)
        meta["step_factor"] = repr(float(step_factor))
    else:
        f_osc = _switch_freq(params, bus, generator, rng)
        step = params.cap_step_fraction * rating
        ring = params.cap_ring_fraction * rating if ring_fraction is None else ring_fraction
        t_rel = np.arange(out.shape[1] - n0) / params.sample_rate_hz
        osc = np.exp(-t_rel / params.switch_damping_s) * np.sin(2.0 * np.pi * f_osc * t_rel)
        for k in range(3):
            alpha_k = angle_deg - 120.0 * k
            out[k, n0:] += step * a * np.sin(theta[k] + np.pi / 2.0)
            out[k, n0:] += ring * a * cosd(alpha_k) * osc
        meta["osc_freq_hz"] = repr(f_osc)

    label = EventLabel(kind, inception_angle_deg=float(angle_deg), priority=priority)
    rec = _record(out, label, params, seed, n0)
    rec.meta.update(meta)
    return rec


def synth_hif(label: EventLabel, params: Optional[SynthParams] = None, seed: int = 0) -> WaveformRecord:
    """High impedance fault on one phase.

    Arc path current (kA) ``max(0, v - Vp)/Rp(t) - max(0, -Vn - v)/Rn(t)``;
    it is exactly zero while ``-Vn <= v <= Vp``.  ``Rp`` and ``Rn`` are
    redrawn uniformly from the resistance band every ``hif_redraw_s``.
    """
    params = (params or SynthParams()).validate()
    if label.kind != "HIF":
        raise SynthError(f"synth_hif needs a HIF label, got {label.kind}")
    phases = faulted_phases(label.fault_type)
    if len(phases) != 1 or not label.fault_type.endswith("g"):
        raise SynthError(f"HIF must be single phase to ground, got {label.fault_type!r}")
    n0 = _inception_index(params, label.inception_angle_deg)
    rng = np.random.default_rng(seed)
    out = _steady(params)
    k = phases[0]
    theta = _phase_grid(params)[k, n0:]
    v = params.hif_phase_peak_kv * np.sin(theta + math.radians(params.hif_voltage_lead_deg))
    i_f = hif_path_current(v, params, rng)
    out[k, n0:] += i_f / params.hif_current_base_ka
    return _record(out, label, params, seed, n0)


def hif_path_current(v_kv: np.ndarray, params: SynthParams, rng) -> np.ndarray:
    vp, vn = params.hif_source_volts
    lo, hi = params.hif_resistance_band
    block = max(1, int(round(params.hif_redraw_s * params.sample_rate_hz)))
    n_blocks = -(-v_kv.shape[0] // block)
    rp = np.repeat(rng.uniform(lo, hi, n_blocks), block)[: v_kv.shape[0]]
    rn = np.repeat(rng.uniform(lo, hi, n_blocks), block)[: v_kv.shape[0]]
    return np.maximum(0.0, v_kv - vp) / rp - np.maximum(0.0, -vn - v_kv) / rn


def apply_ct_saturation(record: WaveformRecord, burden_ohm: float, *, knee_multiple: float = 3.0,
                        reference_burden_ohm: float = 20.0,
                        rated_amplitude: float = 1.0) -> WaveformRecord:
    """Single-knee CT core model.

    Flux integrates ``burden * i * dt``; while it would pass the knee the
    secondary output is zero and the flux is held at the knee, until the
    primary current reverses.  The knee is ``knee_multiple`` times the
    steady-state flux amplitude of the rated current at the reference burden.
    """
    if burden_ohm < 0:
        raise SynthError("burden must be non-negative")
    if burden_ohm == 0:
        return record.with_currents(record.currents.copy(), ct_burden_ohm=0.0)
    dt = 1.0 / record.sample_rate_hz
    omega = 2.0 * np.pi * record.base_freq_hz
    knee = knee_multiple * reference_burden_ohm * rated_amplitude / omega
    m = record.samples_per_cycle
    out = np.empty((3, record.n_samples))
    for k, i in enumerate(record.currents):
        cum = np.cumsum(burden_ohm * i * dt)
        flux0 = -float(np.mean(cum[:m]))
        out[k] = kernels.ct_flux_limit(np.ascontiguousarray(i), dt, float(burden_ohm), knee, flux0)
    return record.with_currents(out, ct_burden_ohm=float(burden_ohm))


def add_noise(record: WaveformRecord, snr_db: float, seed: int, *,
              reference: str = "pre-event") -> WaveformRecord:
    """Per-phase additive white Gaussian noise at the requested SNR.

    The signal power of a phase is measured over the whole pre-event cycles
    when ``reference="pre-event"`` and the record has a known inception, so
    the noise floor stays at the measurement-channel level instead of
    growing with the fault current.  ``reference="record"`` (and records
    without an inception) use the power of the entire phase sequence.
    """
    if math.isnan(snr_db):
        raise SynthError("snr_db must not be NaN")
    if reference not in ("pre-event", "record"):
        raise SynthError("reference must be 'pre-event' or 'record'")
    if math.isinf(snr_db) and snr_db > 0:
        return record.with_currents(record.currents.copy())
    rng = np.random.default_rng(seed)
    cur = record.currents
    m = record.samples_per_cycle
    n_ref = cur.shape[1]
    n0 = record.inception_index
    if reference == "pre-event" and n0 is not None and n0 >= m:
        n_ref = (n0 // m) * m
    out = np.empty_like(cur)
    for k in range(3):
        p_sig = float(np.mean(cur[k, :n_ref] ** 2))
        sigma = math.sqrt(p_sig / 10.0 ** (snr_db / 10.0))
        out[k] = cur[k] + rng.normal(0.0, sigma, size=cur.shape[1])
    return record.with_currents(out, noise_snr_db=float(snr_db))


# ---------------------------------------------------------------------------
# corpus sweeps

_SWITCH_KINDS = ("CapacitorSwitch", "LoadSwitch")


@dataclass
class SweepConfig:
    """Axes of a Cartesian-product corpus.

    Defaults give the desk-scale corpus: 960 faults (f2, f4, f5, f7) and 480
    switching events.  HIF records are off unless ``include_hif`` is set.
    """

    include_faults: bool = True
    fault_locations: tuple = ("f2", "f4", "f5", "f7")
    fault_resistances: tuple = (0.01, 1.0, 10.0)
    fault_angles: tuple = (0.0, 60.0, 150.0, 240.0)
    fault_types: tuple = FAULT_TYPES
    fault_priorities: tuple = PRIORITIES
    include_switching: bool = True
    switching_kinds: tuple = _SWITCH_KINDS
    switching_angles: tuple = (0.0, 75.0, 150.0, 225.0, 300.0)
    generator_states: tuple = ("connected", "disconnected")
    switching_buses: tuple = ("bus4", "bus8", "bus9")
    switching_ratings: tuple = (1, 2, 3, 4)
    switching_priorities: tuple = PRIORITIES
    include_hif: bool = False
    hif_locations: tuple = ("f4", "f5", "f6", "f7", "f8")
    hif_types: tuple = ("ag",)
    hif_angles: tuple = tuple(float(a) for a in range(0, 360, 45))
    hif_priorities: tuple = PRIORITIES
    steady_count: int = 0

    @classmethod
    def full_grid(cls) -> "SweepConfig":
        """Full fault/switching grids: 2880 faults and 2400 switching events."""
        return cls(fault_locations=LOCATIONS,
                   fault_angles=(0.0, 60.0, 120.0, 180.0, 240.0, 300.0),
                   switching_angles=tuple(14.4 * i for i in range(25)))

    def groups(self) -> list[tuple[str, list[tuple]]]:
        out = []
        if self.include_faults:
            out.append(("fault", [self.fault_locations, self.fault_resistances, self.fault_angles,
                                  self.fault_types, self.fault_priorities]))
        if self.include_switching:
            out.append(("switch", [self.switching_kinds, self.switching_angles,
                                   self.generator_states, self.switching_buses,
                                   self.switching_ratings, self.switching_priorities]))
        if self.include_hif:
            out.append(("hif", [self.hif_locations, self.hif_types, self.hif_angles,
                                self.hif_priorities]))
        for name, axes in out:
            for ax in axes:
                if len(ax) == 0:
                    raise SynthError(f"empty sweep axis in {name} group")
        return out

    def expected_count(self) -> int:
        total = sum(math.prod(len(ax) for ax in axes) for _, axes in self.groups())
        return total + self.steady_count


_GROUP_CODE = {"fault": 1, "switch": 2, "hif": 3, "steady": 4}


def derive_seed(master_seed: int, group: str, indices) -> int:
    ss = np.random.SeedSequence([int(master_seed), _GROUP_CODE[group], *map(int, indices)])
    return int(ss.generate_state(1)[0])


def build_corpus(sweep: Optional[SweepConfig] = None, seed: int = 0,
                 params: Optional[SynthParams] = None) -> list[WaveformRecord]:
    sweep = sweep or SweepConfig()
    params = (params or SynthParams()).validate()
    records = []
    for group, axes in sweep.groups():
        ranges = [range(len(ax)) for ax in axes]
        for ix in itertools.product(*ranges):
            vals = [ax[i] for ax, i in zip(axes, ix)]
            rseed = derive_seed(seed, group, ix)
            if group == "fault":
                loc, r, ang, ft, pr = vals
                lab = EventLabel("Fault", ft, loc, float(r), float(ang), pr)
                rec = synth_fault(lab, params, rseed)
            elif group == "switch":
                kind, ang, gen, bus, rating, pr = vals
                rec = synth_switching(kind, float(ang), params, rseed, rating=int(rating),
                                      bus=bus, generator=gen, priority=pr)
            else:
                loc, ft, ang, pr = vals
                lab = EventLabel("HIF", ft, loc, 0.0, float(ang), pr)
                rec = synth_hif(lab, params, rseed)
            records.append(rec)
    for i in range(sweep.steady_count):
        records.append(synth_steady(params, derive_seed(seed, "steady", (i,))))
    return apply_scenario(records, params)


def apply_scenario(records, params: SynthParams):
    """Apply the optional CT-saturation and noise transforms of ``params``."""
    out = []
    for rec in records:
        if params.ct_burden_ohm is not None:
            rec = apply_ct_saturation(rec, params.ct_burden_ohm)
        if params.noise_snr_db is not None:
            rec = add_noise(rec, params.noise_snr_db, derive_seed(rec.seed, "steady", (7,)))
        out.append(rec)
    return out
