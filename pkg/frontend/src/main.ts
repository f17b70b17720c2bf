import { Api } from "./api.js";
import { App } from "./app.js";

const root = document.getElementById("app");
if (root) {
  const app = new App(root, new Api((url) => fetch(url)), {
    replaceUrl: (hash) => history.replaceState(null, "", hash),
  });
  void app.start(location.hash);
}
