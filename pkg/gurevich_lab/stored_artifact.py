import io
import mimetypes
from typing import Optional

from libcloud.storage.base import Object


class StoredArtifact(io.IOBase):
    """A report artifact that has been stored in a libcloud container.

    This class provides a file-like interface for reading the stored content.

    Attributes:
        name: The object name inside the container.
        content_type: Content type given at upload (or guessed from the name).
        object: The `Object` representing the artifact in the storage service.
    """

    def __init__(self, obj: Object) -> None:
        self.name = obj.name
        guessed, _ = mimetypes.guess_type(obj.name)
        self.content_type = (obj.extra or {}).get(
            "content_type", guessed or "application/octet-stream"
        )
        self.object = obj

    def read(self, n: int = -1, chunk_size: Optional[int] = None) -> bytes:
        """Reads the content of the artifact.

        Arguments:
            n: The number of bytes to read. If not specified or set to -1,
                it reads the entire content. Defaults to -1.
            chunk_size: The size of the chunks to read at a time.
        """
        return b"".join(
            self.object.range_as_stream(
                0, end_bytes=n if n > 0 else None, chunk_size=chunk_size
            )
        )

    def close(self) -> None:
        pass

    def seekable(self) -> bool:
        return False  # pragma: no cover

    def writable(self) -> bool:
        return False  # pragma: no cover

    def readable(self) -> bool:
        return True  # pragma: no cover
