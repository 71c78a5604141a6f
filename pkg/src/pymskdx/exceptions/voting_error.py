from pymskdx.exceptions.base_error import MskDxError


class VotingError(MskDxError):
    """Error en la agregación por votación."""
    pass


class MixedReportsError(VotingError):
    """Las corridas a votar pertenecen a reportes distintos."""
    pass


class NoRunsError(VotingError):
    """No hay corridas para votar."""
    pass
