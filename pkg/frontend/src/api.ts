/** Thin client over the prediction service. */
import {
  PredictionResponse,
  ShellRequest,
  TaskInfo,
  TowerRequest,
} from "./types.js";

export class ApiError extends Error {
  constructor(public readonly status: number, detail: string) {
    super(`server returned ${status}: ${detail}`);
  }
}

async function post<T>(url: string, body: unknown, signal: AbortSignal): Promise<T> {
  const response = await fetch(url, {
    method: "POST",
    headers: { "Content-Type": "application/json" },
    body: JSON.stringify(body),
    signal,
  });
  if (!response.ok) {
    let detail = response.statusText;
    try {
      detail = JSON.stringify((await response.json()).detail);
    } catch {
      // keep the status text when the body is not JSON
    }
    throw new ApiError(response.status, detail);
  }
  return (await response.json()) as T;
}

export class Client {
  constructor(private readonly baseUrl: string) {}

  async tasks(): Promise<Record<string, TaskInfo>> {
    const response = await fetch(`${this.baseUrl}/tasks`);
    if (!response.ok) throw new ApiError(response.status, response.statusText);
    return (await response.json()) as Record<string, TaskInfo>;
  }

  predictShell(body: ShellRequest, signal: AbortSignal): Promise<PredictionResponse> {
    return post(`${this.baseUrl}/predict/shell`, body, signal);
  }

  predictTower(body: TowerRequest, signal: AbortSignal): Promise<PredictionResponse> {
    return post(`${this.baseUrl}/predict/tower`, body, signal);
  }
}
