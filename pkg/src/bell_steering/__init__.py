from .models import (
	StateClass,
	ParentStatus,
	BellDiagonalState,
	NoisyObservable,
	Spectrum4,
	SampleRecord,
	SteeringReport,
	InequalityReport,
)
from .states import (
	bell_state,
	edge,
	from_correlation_matrix,
	from_probabilities,
	from_t,
	werner,
)
from .steering_two import steering_measure, steerable_by_two
from .steering_three import classify_three, s3_estimate, s3_search, steerable_by_three_sufficient, triple_compatible
from .harness import classify, report

__all__ = [
	"StateClass",
	"ParentStatus",
	"BellDiagonalState",
	"NoisyObservable",
	"Spectrum4",
	"SampleRecord",
	"SteeringReport",
	"InequalityReport",
	"bell_state",
	"edge",
	"from_correlation_matrix",
	"from_probabilities",
	"from_t",
	"werner",
	"steering_measure",
	"steerable_by_two",
	"classify_three",
	"s3_estimate",
	"s3_search",
	"steerable_by_three_sufficient",
	"triple_compatible",
	"classify",
	"report",
]
