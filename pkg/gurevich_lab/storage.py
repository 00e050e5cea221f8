import logging
import os
from typing import ClassVar, Dict, Optional

from gurevich_lab.exceptions import IoError
from gurevich_lab.stored_artifact import StoredArtifact
from libcloud.storage.base import Container, StorageDriver
from libcloud.storage.drivers.local import LocalStorageDriver
from libcloud.storage.types import ContainerDoesNotExistError

logger = logging.getLogger(__name__)


class StorageManager:
    """Takes care of managing where reports are written.

    Use [add_storage][gurevich_lab.storage.StorageManager.add_storage] method
    to add new `libcloud.storage.base.Container` and associate a name which
    will be use later to retrieve this container.

    The first container will be used as default, to simplify code when you have
    only one container.
    """

    _default_storage_name: ClassVar[Optional[str]] = None
    _storages: ClassVar[Dict[str, Container]] = {}

    @classmethod
    def get_default(cls) -> str:
        """Gets the current application default storage."""
        if cls._default_storage_name is None:
            raise RuntimeError("No default storage has been added")
        return cls._default_storage_name

    @classmethod
    def add_storage(cls, name: str, container: Container) -> None:
        """Add new storage."""
        assert isinstance(container, Container), "Invalid container"
        if name in cls._storages:
            raise RuntimeError(f"Storage {name} has already been added")
        if cls._default_storage_name is None:
            cls._default_storage_name = name
        cls._storages[name] = container

    @classmethod
    def get(cls, name: Optional[str] = None) -> Container:
        """Gets the container instance associate to the name,
        return default if name isn't provided.
        """
        if name is None:
            name = cls.get_default()
        if name in cls._storages:
            return cls._storages[name]
        raise RuntimeError(f"{name} storage has not been added")

    @classmethod
    def save_artifact(
        cls,
        name: str,
        content: bytes,
        upload_storage: Optional[str] = None,
        content_type: str = "application/octet-stream",
    ) -> StoredArtifact:
        """Save ``content`` as object ``name`` into provided `upload_storage`.

        An existing object with the same name is replaced.
        """
        container = cls.get(upload_storage)
        obj = container.upload_object_via_stream(
            iterator=iter([content]),
            object_name=name,
            extra={"content_type": content_type},
        )
        return StoredArtifact(obj)

    @classmethod
    def clear(cls) -> None:
        """Forget every registered storage and the default."""
        cls._default_storage_name = None
        cls._storages = {}


def get_or_create_container(driver: StorageDriver, name: str) -> Container:
    try:
        return driver.get_container(name)
    except ContainerDoesNotExistError:
        return driver.create_container(name)


def local_container(directory: str) -> Container:
    """A libcloud local container that writes straight into ``directory``.

    Raises:
        IoError: When the directory cannot be created.
    """
    path = os.path.abspath(directory)
    try:
        os.makedirs(path, exist_ok=True)
        driver = LocalStorageDriver(os.path.dirname(path) or os.sep)
        return get_or_create_container(driver, os.path.basename(path))
    except (OSError, ValueError) as exc:
        raise IoError(f"cannot use {directory} for reports: {exc}")
