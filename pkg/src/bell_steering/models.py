from __future__ import annotations

import math
from enum import Enum
from typing import Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

Triple = Tuple[float, float, float]
Quad = Tuple[float, float, float, float]

TOL_STATE = 1e-12
TOL_OBSERVABLE = 1e-12

# Correlation triples of |beta_mu,nu>, rows ordered 00, 01, 10, 11
BELL_VERTICES = np.array([
	[1.0, -1.0, 1.0],
	[1.0, 1.0, -1.0],
	[-1.0, 1.0, 1.0],
	[-1.0, -1.0, -1.0],
])
BELL_LABELS = ("p00", "p01", "p10", "p11")


class StateClass(str, Enum):
	separable = "separable"
	uncertified3 = "entangled-unsteerable2-uncertified3"
	steerable3 = "entangled-unsteerable2-steerable3"
	steerable2 = "steerable2"


class ParentStatus(str, Enum):
	feasible = "feasible"
	infeasible = "infeasible"
	boundary_inconclusive = "boundary-inconclusive"


class BellDiagonalState(BaseModel):
	"""Bell-diagonal state in canonical form t1 >= t2 >= |t3|.

	The sign of t3 carries the sign of det T. Build instances through the
	constructors in ``bell_steering.states``; direct construction only
	validates.
	"""
	model_config = ConfigDict(frozen=True)

	t: Triple = Field(..., description="Canonical correlation triple")
	raw_T: Optional[Tuple[Triple, Triple, Triple]] = Field(
		default=None,
		description="Correlation matrix as supplied, before canonicalization"
	)

	@model_validator(mode="after")
	def _check_invariants(self) -> "BellDiagonalState":
		t1, t2, t3 = self.t
		if not all(math.isfinite(x) for x in self.t):
			raise ValueError(f"correlation triple must be finite, got {self.t}")
		if max(abs(t1), abs(t2), abs(t3)) > 1.0 + TOL_STATE:
			raise ValueError(f"correlation coefficients must satisfy |t_i| <= 1, got {self.t}")
		if t1 < t2 - TOL_STATE or t2 < abs(t3) - TOL_STATE:
			raise ValueError(f"triple {self.t} is not canonical (t1 >= t2 >= |t3|)")
		probs = 0.25 * (1.0 + BELL_VERTICES @ np.array(self.t))
		if probs.min() < -TOL_STATE:
			i = int(np.argmin(probs))
			raise ValueError(f"triple {self.t} is outside the tetrahedron ({BELL_LABELS[i]} = {probs[i]:.6g})")
		return self

	@property
	def t1(self) -> float:
		return self.t[0]

	@property
	def t2(self) -> float:
		return self.t[1]

	@property
	def t3(self) -> float:
		return self.t[2]

	@property
	def t_vector(self) -> np.ndarray:
		return np.array(self.t, dtype=float)

	@property
	def correlation_matrix(self) -> np.ndarray:
		"""Canonical (diagonal) correlation matrix."""
		return np.diag(self.t_vector)

	@property
	def probabilities(self) -> Quad:
		"""Bell-basis weights (p00, p01, p10, p11) of the canonical triple, clamped at 0."""
		probs = 0.25 * (1.0 + BELL_VERTICES @ self.t_vector)
		return tuple(float(max(p, 0.0)) for p in probs)  # type: ignore[return-value]


class NoisyObservable(BaseModel):
	"""Unbiased noisy binary qubit observable B(+/-) = (I +/- r.sigma)/2."""
	model_config = ConfigDict(frozen=True)

	r: Triple

	@model_validator(mode="after")
	def _check_norm(self) -> "NoisyObservable":
		norm = math.sqrt(sum(x * x for x in self.r))
		if not math.isfinite(norm) or norm > 1.0 + TOL_OBSERVABLE:
			raise ValueError(f"Bloch vector must satisfy |r| <= 1, got |r| = {norm}")
		return self

	@property
	def vector(self) -> np.ndarray:
		return np.array(self.r, dtype=float)

	@classmethod
	def from_vector(cls, r) -> "NoisyObservable":
		return cls(r=tuple(float(x) for x in r))


class Spectrum4(BaseModel):
	model_config = ConfigDict(frozen=True)

	p: Quad = Field(..., description="Eigenvalues of rho in nondecreasing order")

	@model_validator(mode="after")
	def _check_distribution(self) -> "Spectrum4":
		if abs(sum(self.p) - 1.0) > 1e-12:
			raise ValueError(f"spectrum must sum to 1, got {sum(self.p)}")
		if min(self.p) < -TOL_STATE:
			raise ValueError(f"spectrum has a negative eigenvalue: {self.p}")
		if list(self.p) != sorted(self.p):
			raise ValueError("spectrum must be sorted nondecreasing")
		return self

	@property
	def p_min(self) -> float:
		return self.p[0]

	@property
	def p_max(self) -> float:
		return self.p[-1]


class SampleRecord(BaseModel):
	"""One flattened output row; field aliases are the CSV/JSON column names."""
	model_config = ConfigDict(populate_by_name=True)

	index: int
	# canonical triple
	t1: float
	t2: float
	t3: float
	# Bell weights of the raw triple (sample files) or of the canonical one (reports)
	p00: float
	p01: float
	p10: float
	p11: float
	C: float
	S: float
	chsh: float
	normS: float
	V: float
	frob: float
	s3lb: float
	s3est: Optional[float] = None
	state_class: StateClass = Field(..., alias="class")


SAMPLE_COLUMNS: List[str] = [
	field.alias or name for name, field in SampleRecord.model_fields.items()
]


class SteeringReport(BaseModel):
	model_config = ConfigDict(frozen=True)

	t: Triple
	probabilities: Quad
	concurrence: float = Field(..., ge=0.0, le=1.0)
	steering: float = Field(..., description="S = 2 sqrt(lambda1 + lambda2)")
	chsh: float = Field(..., description="Maximal CHSH value, identical to S")
	normalized_steering: float = Field(..., ge=0.0, le=1.0)
	volume: float = Field(..., ge=0.0, le=1.0)
	frobenius: float
	s3_lower: float
	s3_estimate: Optional[float] = None
	state_class: StateClass

	@model_validator(mode="after")
	def _check_consistency(self) -> "SteeringReport":
		if self.chsh != self.steering:
			raise ValueError("chsh must equal the steering measure S")
		if self.state_class == StateClass.separable and self.concurrence > 0:
			raise ValueError("separable class requires zero concurrence")
		return self

	def to_record(self, index: int = 0) -> SampleRecord:
		t1, t2, t3 = self.t
		p00, p01, p10, p11 = self.probabilities
		return SampleRecord(
			index=index,
			t1=t1, t2=t2, t3=t3,
			p00=p00, p01=p01, p10=p10, p11=p11,
			C=self.concurrence,
			S=self.steering,
			chsh=self.chsh,
			normS=self.normalized_steering,
			V=self.volume,
			frob=self.frobenius,
			s3lb=self.s3_lower,
			s3est=self.s3_estimate,
			state_class=self.state_class,
		)


class InequalityCheck(BaseModel):
	name: str
	bound: str = Field(..., description="Human-readable form of the bound")
	applies_to: str = Field("all", description="'all' or 'entangled'")
	samples: int = 0
	max_violation: float = Field(..., description="Largest lhs - rhs over applicable samples")
	worst_t: Optional[Triple] = None
	passed: bool


class ImplicationCheck(BaseModel):
	name: str
	statement: str
	premise_count: int
	violations: int
	worst_t: Optional[Triple] = None
	passed: bool


class SaturationCheck(BaseModel):
	family: str
	name: str
	parameter_range: Tuple[float, float]
	max_gap: float = Field(..., description="Largest |lhs - rhs| along the family")
	passed: bool


class InequalityReport(BaseModel):
	n: int
	seed: int
	checks: List[InequalityCheck] = Field(default_factory=list)
	implications: List[ImplicationCheck] = Field(default_factory=list)
	saturation: List[SaturationCheck] = Field(default_factory=list)
	extremes: Dict[str, float] = Field(default_factory=dict)

	@property
	def passed(self) -> bool:
		return all(c.passed for c in self.checks)

	@property
	def strict_passed(self) -> bool:
		return (
			self.passed
			and all(c.passed for c in self.implications)
			and all(c.passed for c in self.saturation)
		)
