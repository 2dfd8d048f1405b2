// Typed client for the synthesis service. The client re-validates every
// polyline before it leaves the browser; an invalid sketch never reaches
// the wire.

import { validatePolyline } from "./polyline.js";
import type {
  HealthResponse,
  PhonemizeResponse,
  PolylinePayload,
  SynthesizeRequest,
  SynthesizeResponse,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    message: string,
    readonly field?: string,
  ) {
    super(message);
  }
}

async function readError(response: Response): Promise<ApiError> {
  let message = `${response.status} ${response.statusText}`;
  let field: string | undefined;
  try {
    const body = await response.json();
    if (typeof body.detail === "string") {
      message = body.detail;
    } else if (body.detail) {
      message = body.detail.message ?? message;
      field = body.detail.field;
    }
  } catch {
    // non-JSON error body: keep the status text
  }
  return new ApiError(response.status, message, field);
}

export class StudioClient {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchFn: typeof fetch = fetch,
  ) {}

  async health(): Promise<HealthResponse> {
    const response = await this.fetchFn(`${this.baseUrl}/v1/health`);
    if (!response.ok) throw await readError(response);
    return response.json();
  }

  async phonemize(text: string): Promise<PhonemizeResponse> {
    const response = await this.fetchFn(`${this.baseUrl}/v1/phonemize`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ text }),
    });
    if (!response.ok) throw await readError(response);
    return response.json();
  }

  async synthesize(
    text: string,
    sketch: PolylinePayload | null,
    seed: number,
    steps?: number,
  ): Promise<SynthesizeResponse> {
    if (sketch !== null) {
      const problem = validatePolyline(sketch);
      if (problem !== null) {
        // Client-side guard: never put an invalid polyline on the wire.
        throw new ApiError(0, problem, "sketch.points");
      }
    }
    const request: SynthesizeRequest = { text, seed };
    if (sketch !== null) request.sketch = sketch;
    if (steps !== undefined) request.steps = steps;
    const response = await this.fetchFn(
      `${this.baseUrl}/v1/synthesize?format=json`,
      {
        method: "POST",
        headers: { "content-type": "application/json" },
        body: JSON.stringify(request),
      },
    );
    if (!response.ok) throw await readError(response);
    return response.json();
  }
}
