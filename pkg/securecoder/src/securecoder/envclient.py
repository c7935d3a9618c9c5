"""Client for the newline-delimited JSON environment protocol.

The environment is an external process reached over its stdio or a TCP
socket. Requests are single JSON objects with a cmd field; replies with
ok false raise ProtocolError, anything else is returned parsed. States
arrive as amplitude and phase matrices and are stacked into a (2, m, k)
float array.
"""

from __future__ import annotations

import json
import shlex
import socket
import subprocess
from typing import Callable, Optional, Tuple, Union

import numpy as np


class ProtocolError(RuntimeError):
    pass


class WireEnv:
    def __init__(self, send: Callable[[str], None], recv: Callable[[], str],
                 shutdown: Callable[[], None]):
        self._send = send
        self._recv = recv
        self._shutdown = shutdown
        self._config: Optional[dict] = None

    @classmethod
    def spawn(cls, cmd: Union[str, list]) -> "WireEnv":
        """Launch the environment as a child process and talk on its stdio."""
        argv = shlex.split(cmd) if isinstance(cmd, str) else list(cmd)
        proc = subprocess.Popen(argv, stdin=subprocess.PIPE,
                                stdout=subprocess.PIPE, text=True, bufsize=1)

        def send(line: str) -> None:
            try:
                proc.stdin.write(line + "\n")
                proc.stdin.flush()
            except (BrokenPipeError, OSError) as exc:
                raise ProtocolError(
                    f"environment process is gone (exit {proc.poll()})") from exc

        def recv() -> str:
            line = proc.stdout.readline()
            if not line:
                raise ProtocolError(
                    f"environment process closed the pipe (exit {proc.poll()})")
            return line

        def shutdown() -> None:
            for stream in (proc.stdin, proc.stdout):
                try:
                    stream.close()
                except OSError:
                    pass
            try:
                proc.wait(timeout=5)
            except subprocess.TimeoutExpired:
                proc.kill()
                proc.wait()

        return cls(send, recv, shutdown)

    @classmethod
    def connect(cls, host: str, port: int, timeout: float = 30.0) -> "WireEnv":
        sock = socket.create_connection((host, int(port)), timeout=timeout)
        reader = sock.makefile("r", encoding="utf-8")

        def send(line: str) -> None:
            sock.sendall((line + "\n").encode("utf-8"))

        def recv() -> str:
            line = reader.readline()
            if not line:
                raise ProtocolError("server closed the connection")
            return line

        def shutdown() -> None:
            reader.close()
            sock.close()

        return cls(send, recv, shutdown)

    def request(self, msg: dict) -> dict:
        self._send(json.dumps(msg))
        reply = json.loads(self._recv())
        if isinstance(reply, dict) and reply.get("ok") is False:
            raise ProtocolError(reply.get("error", "unknown protocol error"))
        return reply

    def config(self) -> dict:
        if self._config is None:
            self._config = self.request({"cmd": "config"})
        return self._config

    @property
    def m(self) -> int:
        return int(self.config()["m"])

    @property
    def k(self) -> int:
        return int(self.config()["k"])

    @property
    def horizon(self) -> int:
        return int(self.config()["episode_steps"])

    @staticmethod
    def _state_array(payload: dict) -> np.ndarray:
        return np.stack([np.asarray(payload["amp"], dtype=np.float32),
                         np.asarray(payload["phase"], dtype=np.float32)])

    def reset(self, seed: Optional[int] = None) -> np.ndarray:
        msg: dict = {"cmd": "reset"}
        if seed is not None:
            msg["seed"] = int(seed)
        return self._state_array(self.request(msg)["state"])

    def step(self, amp: np.ndarray,
             phase: np.ndarray) -> Tuple[np.ndarray, float, bool, dict]:
        reply = self.request({"cmd": "step", "action": {
            "amp": np.asarray(amp, dtype=float).tolist(),
            "phase": np.asarray(phase, dtype=float).tolist()}})
        return (self._state_array(reply["state"]), float(reply["reward"]),
                bool(reply["done"]), reply.get("info", {}))

    def close(self) -> None:
        try:
            self.request({"cmd": "close"})
        except (ProtocolError, OSError, ValueError):
            pass
        self._shutdown()

    def __enter__(self) -> "WireEnv":
        return self

    def __exit__(self, *exc) -> None:
        self.close()
