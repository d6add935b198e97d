/**
 * Thin fetch wrapper for the competition API.
 *
 * Responses are handed back as raw text plus the headers the dashboard
 * cares about; JSON interpretation happens downstream so number literals
 * survive untouched.  Leaderboard polling rides the service's ETag: pass
 * the last tag back in and a 304 means nothing changed.
 */

export interface ApiResponse {
  status: number;
  bodyText: string;
  etag: string | null;
  retryAfter: string | null;
}

export class ApiClient {
  private token: string | null = null;

  constructor(private baseUrl: string = "") {}

  setBaseUrl(url: string): void {
    this.baseUrl = url.replace(/\/+$/, "");
  }

  setToken(token: string | null): void {
    this.token = token && token.trim() !== "" ? token.trim() : null;
  }

  hasToken(): boolean {
    return this.token !== null;
  }

  private headers(extra?: Record<string, string>): Record<string, string> {
    const out: Record<string, string> = { ...extra };
    if (this.token !== null) {
      out["Authorization"] = `Bearer ${this.token}`;
    }
    return out;
  }

  private async run(path: string, init: RequestInit): Promise<ApiResponse> {
    const response = await fetch(this.baseUrl + path, init);
    const bodyText = await response.text();
    return {
      status: response.status,
      bodyText,
      etag: response.headers.get("ETag"),
      retryAfter: response.headers.get("Retry-After"),
    };
  }

  get(path: string, etag?: string | null): Promise<ApiResponse> {
    const extra: Record<string, string> = {};
    if (etag) {
      extra["If-None-Match"] = etag;
    }
    return this.run(path, { method: "GET", headers: this.headers(extra) });
  }

  postJson(path: string, body: unknown): Promise<ApiResponse> {
    return this.run(path, {
      method: "POST",
      headers: this.headers({ "Content-Type": "application/json" }),
      body: JSON.stringify(body),
    });
  }

  /** Upload submission bytes as the request body. */
  uploadCsv(path: string, payload: Uint8Array): Promise<ApiResponse> {
    const body = new Uint8Array(payload).buffer as ArrayBuffer;
    return this.run(path, {
      method: "POST",
      headers: this.headers({ "Content-Type": "text/csv" }),
      body,
    });
  }
}
