"""Exception hierarchy shared by the pipeline stages."""


class HfeeError(Exception):
    pass


# ingest
class IngestError(HfeeError, ValueError):
    pass


class MissingFile(IngestError, FileNotFoundError):
    pass


class MalformedRow(IngestError):
    def __init__(self, path, line, reason):
        self.path = str(path)
        self.line = line
        self.reason = reason
        super().__init__(f"{self.path}:{line}: {reason}")


class NonMonotoneTime(IngestError):
    def __init__(self, path, line, reason="timestamp does not increase"):
        self.path = str(path)
        self.line = line
        super().__init__(f"{self.path}:{line}: {reason}")


class EmptyStream(IngestError):
    pass


# features
class NoUsableRows(HfeeError, ValueError):
    pass


# subjects
class DegenerateFeature(HfeeError, ValueError):
    pass


class TooFewSubjects(HfeeError, ValueError):
    pass


# regress
class RankDeficient(HfeeError, ValueError):
    pass


class TooFewRows(HfeeError, ValueError):
    pass


class SchemaMismatch(HfeeError, ValueError):
    pass


class MissingProjection(HfeeError, KeyError):
    pass


# evaluate
class ConstantTruth(HfeeError, ValueError):
    pass


class SubsetEmpty(HfeeError, ValueError):
    pass


class MissingReports(HfeeError, FileNotFoundError):
    pass
