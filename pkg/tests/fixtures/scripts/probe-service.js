(function () {
  var probes = {
    adblock: "chrome-extension://gighmmpiobklfepjocnamgkkbiglidom/img/icon24.png",
    adblock_plus: "chrome-extension://cfhdojbkjhnklbpkdaibdccddilifddb/block.html",
    ublock: "chrome-extension://epcnnfbjfcgphgdmggkamkmgojdagdnn/document-blocked.html"
  };
  function probe(name, url, done) {
    var img = new Image();
    img.onload = function () { done(name, true); };
    img.onerror = function () { done(name, false); };
    img.src = url;
  }
  var found = [];
  for (var name in probes) {
    probe(name, probes[name], function (who, hit) {
      if (hit) { found.push(who); }
    });
  }
  setTimeout(function () {
    var b = document.createElement("DIV");
    b.id = "influads_block";
    b.style.width = "1px";
    b.style.height = "1px";
    b.style.top = "-1000px";
    b.style.left = "-1000px";
    document.body.appendChild(b);
    try {
      var hidden = window.getComputedStyle(b).display === "none";
      if (hidden || found.length > 0) {
        new Image().src = "/telemetry?adblock=" + found.join(",");
      }
    } catch (err) {
      // measurement is best effort
    } finally {
      b.parentNode.removeChild(b);
    }
  }, 1000);
})();
