"""Anchored self-checks: working sets, tile energy, ISA encoding and tile timing."""
import math
from typing import Any, Callable

import numpy as np
from pydantic import BaseModel

from app.aimc.tile import TileTiming
from app.energy import AimcEnergyModel, aimc_model_for, aimc_mvm_energy
from app.errors import DecodeError, UsageError
from app.isa.instructions import FIELDS, CmInstruction, CmOp, decode, encode
from app.machine.config import SystemConfig
from app.workloads import LstmSpec, MlpSpec, working_set

# reference working-set sizes the closed forms are compared with, in bytes
LSTM_REFERENCE_DIGITAL = {256: 378_000, 512: 1_280_000, 750: 2_590_000}
LSTM_REFERENCE_ANALOG = {256: 660, 512: 1_170, 750: 1_650}
REFERENCE_TOLERANCE = 0.20

ISA_FUZZ_CASES = 1000


class Check(BaseModel):
    suite: str
    name: str
    expected: str
    actual: str
    ok: bool


def _exact(suite: str, name: str, expected: Any, actual: Any) -> Check:
    return Check(suite=suite, name=name, expected=str(expected), actual=str(actual), ok=expected == actual)


def _close(suite: str, name: str, expected: float, actual: float, rel: float = 1e-9) -> Check:
    return Check(suite=suite, name=name, expected=f"{expected:.6e}", actual=f"{actual:.6e}",
                 ok=math.isclose(expected, actual, rel_tol=rel))


def _within(suite: str, name: str, reference: int, actual: int) -> Check:
    ok = abs(actual - reference) <= REFERENCE_TOLERANCE * reference
    return Check(suite=suite, name=name, expected=f"{reference} (+-20%)", actual=str(actual), ok=ok)


def check_workingset() -> list[Check]:
    mlp = working_set(MlpSpec(n=1024))
    checks = [
        _exact("workingset", "mlp n=1024 digital bytes", 2_100_224, mlp.digital_bytes),
        _exact("workingset", "mlp n=1024 analog bytes", 3_072, mlp.analog_bytes),
    ]
    for n_h in (256, 512, 750):
        ws = working_set(LstmSpec(n_h=n_h))
        checks.append(_within("workingset", f"lstm n_h={n_h} digital bytes", LSTM_REFERENCE_DIGITAL[n_h], ws.digital_bytes))
        checks.append(_within("workingset", f"lstm n_h={n_h} analog bytes", LSTM_REFERENCE_ANALOG[n_h], ws.analog_bytes))
    return checks


def check_energy() -> list[Check]:
    return [
        _close("energy", "256x256 MVM at the reference node", 10.24e-9, aimc_mvm_energy(256, 256, AimcEnergyModel())),
        _close("energy", "256x256 MVM, high_power", 54.272e-9, aimc_mvm_energy(256, 256, aimc_model_for("high_power"))),
        _close("energy", "256x256 MVM, low_power", 20.48e-9, aimc_mvm_energy(256, 256, aimc_model_for("low_power"))),
    ]


def _random_instruction(rng: np.random.Generator) -> CmInstruction:
    op = list(CmOp)[int(rng.integers(len(CmOp)))]
    width = {name: 1 << FIELDS[name][1] for name in ("rm", "ra", "rn", "rd")}
    return CmInstruction(op=op, **{name: int(rng.integers(w)) for name, w in width.items()})


def check_isa(seed: int = 0) -> list[Check]:
    rng = np.random.default_rng(seed)
    mismatches = 0
    for _ in range(ISA_FUZZ_CASES):
        instr = _random_instruction(rng)
        if decode(encode(instr)) != instr:
            mismatches += 1
    checks = [_exact("isa", f"encode/decode round trip ({ISA_FUZZ_CASES} instructions)", 0, mismatches)]
    word = encode(CmInstruction(op=CmOp.PROCESS)) | (1 << FIELDS["reserved"][0])
    try:
        decode(word)
        rejected = False
    except DecodeError:
        rejected = True
    checks.append(_exact("isa", "reserved bits rejected", True, rejected))
    return checks


def check_timing() -> list[Check]:
    high, low = SystemConfig.for_profile("high_power"), SystemConfig.for_profile("low_power")
    timing = TileTiming()
    return [
        _exact("timing", "CM_PROCESS cycles at 2.3 GHz", 230, high.cycles(high.tile_timing().process_time())),
        _exact("timing", "CM_PROCESS cycles at 0.8 GHz", 80, low.cycles(low.tile_timing().process_time())),
        _exact("timing", "queue 1024 B at 4 GB/s (ps)", 256_000, timing.queue_time(1024)),
    ]


SUITES: dict[str, Callable[[], list[Check]]] = {
    "workingset": check_workingset,
    "energy": check_energy,
    "isa": check_isa,
    "timing": check_timing,
}


def validate(what: str = "all") -> list[Check]:
    if what == "all":
        return [c for suite in SUITES.values() for c in suite()]
    try:
        return SUITES[what]()
    except KeyError:
        raise UsageError(f"unknown validation suite {what!r}; choose from {', '.join(SUITES)} or all") from None
